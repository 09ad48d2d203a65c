import numpy as np
import pytest

from wavepred.basis import make_layout, synthesis
from wavepred.filters import build_filter
from wavepred.operators import (ModelSystem, SmoothnessError, UnsupportedPotentialError,
                                assemble, assemble_single_level, connection_table, contract,
                                entries, format_connection_table, load_or_build_table,
                                matrix_element, operator_row, parse_connection_table, to_multilevel)
from wavepred.oracle import extrapolated_element


@pytest.mark.parametrize("genus", range(3, 11))
def test_connection_invariants(genus):
    ct = connection_table(build_filter(genus))
    d = ct.shifts
    assert np.max(np.abs(ct.lam - ct.lam[::-1])) < 1e-12
    assert abs(ct.lam.sum()) < 1e-10
    assert abs(np.sum(d ** 2 * ct.lam) - 2) < 1e-10
    assert np.array_equal(ct.t[0], (d == 0).astype(float))
    assert ct.T(0, 3) == 0


def test_connection_reference(ct):
    assert abs(ct.L(0) - -4.165973640696431) < 1e-12
    assert abs(ct.L(1) - 2.642070208104641) < 1e-12


def test_haar_rejected():
    with pytest.raises(SmoothnessError):
        connection_table(build_filter(1))


def test_lambda0_quadrature(fb, osc):
    # <s|-1/2 d2|s> = -1/2 Lambda_0
    q = extrapolated_element(fb, ("s", 0, 0), ("s", 0, 0), "kinetic", osc)
    assert abs(-2 * q - connection_table(fb).L(0)) < 1e-6


def test_table_cache(tmp_path, fb, ct):
    text = format_connection_table(ct)
    back = parse_connection_table(text)
    assert np.max(np.abs(back.lam - ct.lam)) < 1e-15
    assert np.max(np.abs(back.t - ct.t)) < 1e-15
    a = load_or_build_table(fb, tmp_path)
    assert (tmp_path / "conntab_p04.txt").read_text().startswith("conntab v1 genus=4")
    assert np.allclose(load_or_build_table(fb, tmp_path).lam, a.lam, atol=1e-15)


def test_model_system():
    m = ModelSystem.harmonic(2.0)
    assert (m.v0, m.v1, m.v2) == (0.0, 0.0, 2.0)
    assert ModelSystem.from_dict(m.to_dict()) == m
    with pytest.raises(UnsupportedPotentialError):
        ModelSystem.polynomial([0, 0, 1, 1])
    with pytest.raises(ValueError):
        ModelSystem.harmonic(0)


def test_diagonal_formula(osc, ct):
    for k in (-3, 0, 5):
        expect = -0.5 * ct.L(0) + 0.5 * (ct.T(2, 0) + k * k + 2 * k * ct.T(1, 0))
        assert abs(entries(osc, ct, 0, k, 0) - expect) < 1e-14
    assert abs(entries(osc, ct, 0, 0, 0, "potential") - 0.5 * ct.T(2, 0)) < 1e-15


def test_single_level_vs_quadrature(fb, ct, osc):
    rng = np.random.default_rng(3)
    lay = make_layout(fb, 3, 8.0)
    h = assemble_single_level(osc, lay, ct).matrix
    lo = lay.fine[0]
    for _ in range(20):
        i = int(rng.integers(30, 200))
        j = i + int(rng.integers(-6, 7))
        kin = extrapolated_element(fb, ("s", 3, lo + i), ("s", 3, lo + j), "kinetic", osc)
        pot = extrapolated_element(fb, ("s", 3, lo + i), ("s", 3, lo + j), "potential", osc)
        assert abs(h[i, j] - (kin + pot)) < 1e-6


def test_multilevel_similarity(fb, ct, osc):
    lay = make_layout(fb, 2, 8.0)
    hs = assemble_single_level(osc, lay, ct)
    hm = to_multilevel(hs)
    assert hm.representation == "multilevel"
    assert np.max(np.abs(hm.matrix - hm.matrix.T)) <= 1e-12 * np.max(np.abs(hm.matrix))
    # the multilevel span is a subspace of the fine window, so compare the
    # multilevel spectrum with an exact solve on that span
    s = lay.synthesis_matrix
    ref = np.linalg.eigvalsh(s.T @ hs.matrix @ s)
    ev = np.linalg.eigvalsh(hm.matrix)
    assert np.max(np.abs(ev - ref) / np.abs(ref)) < 1e-10
    assert ev[0] > 0
    # bound states live well inside both windows
    low = np.linalg.eigvalsh(hs.matrix)[:6]
    assert np.max(np.abs(ev[:6] - low) / low) < 1e-10


def test_level0_identity(fb, ct, osc):
    lay = make_layout(fb, 0, 8.0)
    hs = assemble_single_level(osc, lay, ct)
    assert np.allclose(to_multilevel(hs).matrix, hs.matrix, atol=1e-14)


def test_multilevel_entry_quadrature(fb, ct, osc):
    lay = make_layout(fb, 2, 8.0)
    hm = assemble(osc, lay, ct).matrix
    i = lay.position("w", 1, 0)
    q = sum(extrapolated_element(fb, ("w", 1, 0), ("w", 1, 0), op, osc) for op in ("kinetic", "potential"))
    assert abs(hm[i, i] - q) < 1e-6
    assert abs(hm[i, i] - matrix_element(osc, fb, ct, ("w", 1, 0), ("w", 1, 0))) < 1e-10


def test_translation_covariance(fb, ct, osc):
    a = [entries(osc, ct, 2, k, 3, "kinetic") for k in (-5, 0, 7)]
    assert np.ptp(a) == 0


def test_operator_row(fb, ct, osc, solve):
    sol = solve(2)
    v = sol.vectors[:, 0]
    lay = sol.layout
    for label in [("s", 0, 1), ("w", 1, -3), ("w", 0, 0)]:
        val = operator_row(osc, fb, ct, label, v, lay)
        assert abs(val - sol.eigenvalues[0] * v[lay.position(*label)]) < 1e-9
    assert operator_row(osc, fb, ct, ("w", 2, 500), v, lay) == 0.0


def test_operator_row_quadrature(fb, ct, osc, solve):
    from wavepred.oracle import aitken, basis_samples, expansion_samples, quad_matrix_element

    sol = solve(2)
    psi = sol.fine_vector(0, fb)
    lo = sol.layout.fine[0]
    exact = contract(osc, fb, ct, ("w", 2, 0), psi, lo, 2)
    kin = []
    for j in (11, 12, 13):
        bra = basis_samples(fb, "w", 2, 0, 3 + j)
        ket = expansion_samples(fb, psi, lo, 2, 3 + j)
        kin.append(quad_matrix_element(bra, ket, "kinetic", osc))
    pot = quad_matrix_element(bra, ket, "potential", osc)
    assert abs(exact - (aitken(*kin) + pot)) < 1e-6
