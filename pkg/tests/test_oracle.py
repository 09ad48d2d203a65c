import warnings

import numpy as np
import pytest

from wavepred.basis import DyadicSamples, make_layout, synthesis
from wavepred.oracle import (GridMismatchError, PrecisionWarning, aitken, basis_samples,
                             coefficient_block, exact_state, extrapolated_element, level_weights,
                             project_exact, quad_matrix_element)
from wavepred.operators import matrix_element

X = np.linspace(-12, 12, 240001)
H = X[1] - X[0]


def test_ground_state():
    s = exact_state(0)
    assert s.energy == 0.5
    assert np.allclose(s(X), np.pi ** -0.25 * np.exp(-X ** 2 / 2), atol=1e-15)


def test_parity():
    s = exact_state(1)
    assert s(0.0) == 0
    assert abs(s.derivative(0.0)) > 0.5
    assert exact_state(5).energy == 5.5


def test_orthonormal():
    vals = [exact_state(i)(X) for i in range(6)]
    for i in range(6):
        for j in range(6):
            assert abs(np.sum(vals[i] * vals[j]) * H - (i == j)) < 1e-10


def test_derivative():
    s = exact_state(3, 1.7)
    num = np.gradient(s(X), H)
    assert np.max(np.abs(num - s.derivative(X))) < 1e-6


def test_bad_state():
    with pytest.raises(ValueError):
        exact_state(11)
    with pytest.raises(ValueError):
        exact_state(0, -1.0)


def _gauss_samples(grid):
    h = 2.0 ** -grid
    x = np.arange(-12 / h, 12 / h + 1) * h
    return DyadicSamples(grid, x[0], exact_state(0)(x))


def test_virial(osc):
    g = _gauss_samples(10)
    assert abs(quad_matrix_element(g, g, "potential", osc) - 0.25) < 1e-5
    assert abs(quad_matrix_element(g, g, "kinetic", osc) - 0.25) < 1e-4


def test_grid_mismatch(fb, osc):
    a = basis_samples(fb, "s", 0, 0, 8)
    b = basis_samples(fb, "s", 0, 0, 9)
    with pytest.raises(GridMismatchError):
        quad_matrix_element(a, b, "overlap", osc)
    c = DyadicSamples(8, 0.001, a.values)
    with pytest.raises(GridMismatchError):
        quad_matrix_element(a, c, "overlap", osc)


def test_aitken():
    seq = [2 + 0.3 ** n for n in (5, 6, 7)]
    assert abs(aitken(*seq) - 2) < 1e-14


def test_wavelet_potential_element(fb, ct, osc):
    q = extrapolated_element(fb, ("w", 2, 0), ("w", 2, 0), "potential", osc)
    assert abs(q - matrix_element(osc, fb, ct, ("w", 2, 0), ("w", 2, 0), "potential")) < 1e-6


def test_zero_function(fb):
    lay = make_layout(fb, 2, 8.0)
    assert np.all(project_exact(lambda x: 0 * x, lay, fb) == 0)


def test_parseval(fb):
    lay = make_layout(fb, 4, 8.0)
    d = project_exact(exact_state(0), lay, fb)
    assert abs(d @ d - 1) < 1e-6


def test_reconstruction(fb):
    lay = make_layout(fb, 5, 8.0)
    d = project_exact(exact_state(0), lay, fb)
    c = synthesis(d, lay, fb)
    lo = lay.fine[0]
    # point values of the expansion on the level-5+4 grid
    depth = 4
    s = basis_samples(fb, "s", 5, 0, 5 + depth).values
    step = 2 ** depth
    v = np.zeros((len(c) - 1) * step + len(s))
    for i, ci in enumerate(c):
        v[i * step:i * step + len(s)] += ci * s
    x = lo * 2.0 ** -5 + np.arange(len(v)) * 2.0 ** -(5 + depth)
    inner = np.abs(x) < 7.5
    assert np.max(np.abs(v[inner] - exact_state(0)(x[inner]))) < 1e-6


def test_reflection_symmetry(fb):
    # extremal-phase wavelets are not symmetric, so the even ground state
    # gives a mirrored pattern of magnitudes only approximately
    lay = make_layout(fb, 4, 8.0)
    d = project_exact(exact_state(0), lay, fb)
    k, dk = coefficient_block(d, lay, "w", 3)
    lookup = dict(zip(k, dk))
    shift = -(fb.support - 1)
    diff = max(abs(abs(lookup[j]) - abs(lookup[shift - j])) for j in k if shift - j in lookup)
    assert diff < 0.25 * np.max(np.abs(dk))


def test_precision_warning(fb):
    lay = make_layout(fb, 1, 8.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        project_exact(exact_state(0), lay, fb, depth=3)
    assert any(issubclass(r.category, PrecisionWarning) for r in rec)


def test_tail_weight(fb):
    lay = make_layout(fb, 6, 8.0)
    w = level_weights(project_exact(exact_state(0), lay, fb), lay)
    vals = [w[m] for m in range(6)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
