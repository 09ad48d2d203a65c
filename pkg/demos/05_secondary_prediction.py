"""
Two-step prediction and smoothing
=================================

Predict the finest wavelet coefficients of a level-4 expansion two levels
ahead, from the level-2 eigenvector, and compare raw and smoothed values with
the coefficients of the exact oscillator ground state.
"""

from wavepred.analysis import coefficient_comparison
from wavepred.filters import build_filter
from wavepred.operators import ModelSystem

fb = build_filter(4)
osc = ModelSystem.harmonic(1.0)

c = coefficient_comparison(osc, fb, target=4)
print("    x        d_exact        alpha         beta      beta_avg")
for i in range(0, len(c.k), 4):
    print("%7.3f %13.3e %13.3e %13.3e %13.3e"
          % (c.x[i], c.d_exact[i], c.alpha[i], c.beta[i], c.beta_avg[i]))

for name in ("d_eig", "alpha", "beta", "beta_avg"):
    print("RMS(%-8s - d_exact) = %.3e" % (name, c.rms(name)))
