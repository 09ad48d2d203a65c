"""
Oscillator energies level by level
==================================

Solve the harmonic oscillator in a multilevel Daubechies basis for
increasing resolution and print the energy table, including the energies
predicted from each level before the next one is solved.
"""

import numpy as np

from wavepred.analysis import energy_table, solution
from wavepred.filters import build_filter
from wavepred.operators import ModelSystem

fb = build_filter(4)
osc = ModelSystem.harmonic(1.0)

# each row is either an eigensolve E[M] or a prediction Epred[M] made from M-1
table = energy_table(osc, fb, M_max=4, mode="additive")
for label, row in zip(table.labels, table.values):
    print("%-10s" % label, " ".join("%.12f" % v for v in row))

# the basis is truncated to |x| <= a; widening it changes nothing visible
for M in range(5):
    d = np.abs(solution(osc, fb, M, 10.0).eigenvalues - solution(osc, fb, M).eigenvalues).max()
    print("M=%d  a=8 vs a=10: %.1e" % (M, d))

# predictions land on the other side of the exact value at fine levels
for M in range(2, 5):
    print("M=%d  E[M-1]-0.5 = %+.2e   Epred[M]-0.5 = %+.2e"
          % (M, table.eig(M - 1)[0] - 0.5, table.pred(M)[0] - 0.5))
