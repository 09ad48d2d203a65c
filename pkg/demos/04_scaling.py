"""
How the prediction terms scale with level
=========================================

Fit log2 slopes of the diagonal wavelet energy, the coupling R, lambda and
the predicted weight sum(alpha^2) against the level M.
"""

from wavepred.analysis import exact_tail_weights, fit_log2_slope, scaling_series, weight_tail_bound
from wavepred.filters import build_filter
from wavepred.operators import ModelSystem

fb = build_filter(4)
osc = ModelSystem.harmonic(1.0)

fits = scaling_series(osc, fb, range(2, 7))
for name, fit in fits.items():
    print("%-12s slope %+6.2f  (levels used: %s)" % (name, fit.slope, fit.levels.tolist()))

# kinetic energy of a wavelet grows exactly fourfold per level
print("Wkin values:", " ".join("%.4g" % v for v in fits["Wkin"].aggregate))

# the weight carried by exact wavelet coefficients drops faster than the 2^-6M bound
levels = range(2, 6)
w = exact_tail_weights(fb, levels)
for m, v in zip(levels, w):
    print("m=%d  exact weight %.3e   bound %.3e" % (m, v, weight_tail_bound(m)))
print("exact weight slope %.2f" % fit_log2_slope(levels, w)[0])
