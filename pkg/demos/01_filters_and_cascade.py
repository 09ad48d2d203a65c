"""
Daubechies filters and the cascade algorithm
============================================

Build the genus-4 filter pair, check its vanishing moments and sample the
scaling function and wavelet on a dyadic grid.
"""

import numpy as np

from wavepred.basis import cascade_evaluate, compute_moments, refinement_residual
from wavepred.filters import build_filter

# the low-pass filter h has length 2*genus; g is its quadrature mirror
fb = build_filter(4)
print("h =", np.array2string(fb.h, precision=6))
print("sum h = %.15f   sum h^2 = %.15f" % (fb.h.sum(), fb.h @ fb.h))

# four vanishing wavelet moments, a nonzero first scaling moment
m = compute_moments(fb, 5)
print("wavelet moments   ", np.array2string(m.wavelet, precision=3))
print("scaling moments   ", np.array2string(m.scaling, precision=6))

# pointwise values on a grid of spacing 2^-10
s = cascade_evaluate(fb, "scaling", 10)
w = cascade_evaluate(fb, "wavelet", 10)
print("support of s: [%g, %g]" % (s.x[0], s.x[-1]))
print("integral of s = %.10f" % s.trapezoid())
print("refinement residual = %.2e" % refinement_residual(fb, s))
print("max |w| = %.4f at x = %.4f" % (np.abs(w.values).max(), w.x[np.argmax(np.abs(w.values))]))

# optional picture
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots()
    ax.plot(s.x, s.values, label="s")
    ax.plot(w.x, w.values, label="w")
    ax.legend()
    fig.savefig("filters_and_cascade.png")
