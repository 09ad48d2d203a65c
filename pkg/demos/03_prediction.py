"""
Predicting wavelet coefficients without a new eigensolve
========================================================

From the level-2 ground state, every candidate wavelet w_{2,k} gets a
closed-form coefficient.  Compare the three ways of turning those
coefficients into an energy estimate with the level-3 eigenvalue.
"""

import numpy as np

from wavepred.analysis import solution
from wavepred.filters import build_filter
from wavepred.operators import ModelSystem
from wavepred.predictor import MODES, predict_level, select_indices

fb = build_filter(4)
osc = ModelSystem.harmonic(1.0)
sol = solution(osc, fb, 2)

rec = predict_level(sol, 0, fb=fb)
print("   k        x            W             R          alpha")
for k, x, W, R, a in zip(rec.ks, rec.x, rec.W, rec.R, rec.coef):
    if abs(a) > 1e-6:
        print("%4d %8.3f %12.4f %14.4e %14.4e" % (k, x, W, R, a))

# only a handful of wavelets matter
print("kept at threshold 1e-3:", select_indices(rec, 1e-3))

target = solution(osc, fb, 3).eigenvalues[0]
for mode in MODES:
    e = predict_level(sol, 0, mode, fb).e_pred
    print("%-9s E_pred = %.12f   error vs E[3] = %+.2e" % (mode, e, e - target))
print("E[2] = %.12f  E[3] = %.12f" % (sol.eigenvalues[0], target))
