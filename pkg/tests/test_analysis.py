import numpy as np
import pytest

from table1 import EIG, EXACT, PRED
from wavepred.analysis import (InsufficientLevelsError, coefficient_comparison, energy_table,
                               error_vs_norm, fig1_rows, fig2_rows, fig3_rows, fit_log2_slope,
                               scaling_series, weight_tail_bound, _loglog_slope, _norm2_diff)
from wavepred.eigen import rayleigh_quotient


def test_weight_tail_bound():
    assert abs(weight_tail_bound(0) - 64 / 63) < 1e-15
    for M in range(6):
        assert weight_tail_bound(M + 1) / weight_tail_bound(M) == 2.0 ** -6
    with pytest.raises(ValueError):
        weight_tail_bound(-1)


def test_fit_log2_slope():
    M = np.arange(5)
    slope, _, res, used = fit_log2_slope(M, 3 * 2.0 ** (-3 * M))
    assert abs(slope + 3) < 1e-12 and res < 1e-12 and len(used) == 5
    slope, _, _, used = fit_log2_slope(M, [1, 0.5, 0.25, 1e-14, 0])
    assert list(used) == [0, 1, 2]
    with pytest.raises(InsufficientLevelsError):
        fit_log2_slope(M, [1, 0.5, 0, 0, 0])


@pytest.fixture(scope="module")
def fits(fb, osc):
    return scaling_series(osc, fb, range(0, 7))


def test_kinetic_slope(fits):
    assert abs(fits["Wkin"].slope - 2) < 1e-9


def test_potential_at_centre(fits):
    c = np.abs(fits["Wpot"].at_center)
    assert np.all(np.diff(c) < 0)
    assert c[-1] < 1e-3


def test_scaling_csv(fits):
    text = fits["R"].to_csv().splitlines()
    assert text[0] == "M,aggregate,at_center,slope,residual"
    assert len(text) == 8


def test_alpha_weight_slope(fits):
    assert fits["alpha_weight"].slope <= -6


def test_insufficient_levels(fb, osc):
    with pytest.raises(InsufficientLevelsError):
        scaling_series(osc, fb, [0, 1])


@pytest.fixture(scope="module")
def table(fb, osc):
    return energy_table(osc, fb, 4)


def test_energy_table(table):
    assert np.array_equal(table.row("exact"), EXACT)
    assert abs(table.eig(1)[0] - 0.500808994455534) < 1e-8
    assert table.labels[:4] == ("exact", "E[0]", "Epred[1]", "E[1]")
    header = table.to_csv().splitlines()[0]
    assert header == "row_label,state0,state1,state2,state3,state4,state5"
    for M in range(4):
        assert np.all(table.eig(M + 1) <= table.eig(M))


def test_projected_row4(fb, osc):
    t = energy_table(osc, fb, 4, mode="projected")
    assert abs(t.pred(4)[5] - 5.499908076893959) < 1e-6
    assert np.max(np.abs(t.pred(4) - PRED[4])) < 1e-6


def test_error_decreases(table):
    errs = np.array([np.abs(table.eig(M) - EXACT) for M in range(5)])
    assert np.all(np.diff(errs, axis=0) < 0)


def test_prediction_improves(table):
    for M in range(1, 4):
        assert np.all(np.abs(table.pred(M + 1) - EXACT) < np.abs(table.eig(M) - EXACT))


def test_overcompensation(table):
    for M in range(2, 5):
        assert np.sign(table.pred(M)[0] - 0.5) == -np.sign(table.eig(M - 1)[0] - 0.5)


def test_norm_difference():
    a = np.array([0.0, 1.0, 2.0])
    assert _norm2_diff(a, 3, -a, 3) == 0.0
    assert _norm2_diff(a, 0, a, 1) == 6.0
    assert np.isnan(_loglog_slope([(0.0, 1.0), (1e-16, 2.0)]))


def test_perturbation_slope(solve):
    sol = solve(3)
    h = sol.hamiltonian
    v0, v1 = sol.vectors[:, 0], sol.vectors[:, 1]
    pts = []
    for eps in 10.0 ** -np.arange(2, 6):
        v = (v0 + eps * v1) / np.hypot(1, eps)
        pts.append((np.sum((v - v0) ** 2), rayleigh_quotient(h, v) - sol.eigenvalues[0]))
    assert abs(_loglog_slope(pts) - 1) < 1e-3


def test_error_vs_norm_points(fb, osc):
    s = error_vs_norm(osc, fb, range(2, 5), states=[0])
    assert len(s.points) == 6
    assert {p[4] for p in s.points} == {"eig", "pred"}
    assert s.to_csv().splitlines()[0] == "state,level,norm2_diff,energy_err,source_tag"
    with pytest.raises(InsufficientLevelsError):
        error_vs_norm(osc, fb, [2, 3])


def test_figure_rows(fb, osc):
    r1 = list(fig1_rows(osc, fb, [0, 1]))
    assert r1[0] == ("M", "k", "x", "W", "W_kin", "W_pot")
    r2 = list(fig2_rows(osc, fb, [1]))
    assert r2[0] == ("M", "k", "x", "R", "lambda", "alpha")
    r3 = list(fig3_rows(osc, fb, range(0, 3)))
    assert len(r3) == 1 + 3 * 6


def test_coefficient_comparison(fb, osc):
    c = coefficient_comparison(osc, fb, 4)
    assert c.rms("d_eig") < c.rms("alpha")
    assert c.rms("beta_avg") <= c.rms("beta")
    rows = list(c.rows())
    assert rows[0] == ("k", "x", "d_exact", "d_eig", "alpha", "beta", "beta_avg")
    with pytest.raises(ValueError):
        coefficient_comparison(osc, fb, 1)
