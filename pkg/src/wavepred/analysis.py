"""Level-by-level studies: energy tables, scaling fits and figure data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import SpectralSolution, solve_model
from .filters import FilterBank
from .operators import ModelSystem, connection_table, refine_to, wavelet_terms
from .oracle import coefficient_block, exact_state, level_weights, project_exact
from .predictor import (alpha, cross_terms, predict_level, secondary_predict,
                        smooth_average)
from .output import csv_text

FLOOR = 1e-13
QUANTITIES = ("Wkin", "Wpot", "R", "lambda", "alpha", "alpha_weight")


class InsufficientLevelsError(ValueError):
    pass


# --- solution cache ---------------------------------------------------------------

_SOLUTIONS: dict = {}


def solution(model: ModelSystem, fb: FilterBank, level: int, halfwidth: float = 8.0,
             n_states: int = 6) -> SpectralSolution:
    """Memoised :func:`solve_model`."""
    key = (model, fb.genus, level, float(halfwidth), n_states)
    if key not in _SOLUTIONS:
        _SOLUTIONS[key] = solve_model(model, fb, level, halfwidth, n_states)
    return _SOLUTIONS[key]


def clear_cache():
    _SOLUTIONS.clear()


# --- fits -------------------------------------------------------------------------


def fit_log2_slope(levels, values, floor: float = FLOOR):
    """Least-squares slope of log2|values| against level.

    Values at or below ``floor`` are dropped.  Returns (slope, intercept,
    rms residual, levels used).
    """
    levels = np.asarray(levels, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    keep = values > floor
    if keep.sum() < 3:
        raise InsufficientLevelsError("a slope fit needs at least 3 usable levels")
    x, y = levels[keep], np.log2(values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))), x.astype(int)


@dataclass(frozen=True)
class ScalingFit:
    quantity: str
    levels: np.ndarray
    aggregate: np.ndarray
    at_center: np.ndarray
    slope: float
    intercept: float
    residual: float

    def rows(self):
        """CSV rows; the fitted slope and residual repeat on every line."""
        yield ("M", "aggregate", "at_center", "slope", "residual")
        for M, a, c in zip(self.levels, self.aggregate, self.at_center):
            yield (M, a, c, self.slope, self.residual)

    def to_csv(self) -> str:
        rows = list(self.rows())
        return csv_text(rows[0], rows[1:])


def weight_tail_bound(M: int) -> float:
    """Upper bound on the squared-coefficient weight beyond level M."""
    if M < 0:
        raise ValueError("M must be >= 0")
    return 2.0 ** (-6 * M) / (1 - 2.0 ** -6)


def center_shift(support: int) -> int:
    """Shift k whose wavelet w_{M,k} is centred closest to x = 0 from the left."""
    return -((support + 1) // 2)


def wavelet_diagonal(model: ModelSystem, fb: FilterBank, level: int, ks, part: str = "full"):
    """<w_{level,k}|H|w_{level,k}> for the given shifts."""
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    ct = connection_table(fb)
    out = np.empty(len(ks))
    for i, k in enumerate(ks):
        w, _, _ = wavelet_terms(model, fb, ct, np.zeros(1), int(k), level, level, int(k), int(k), part)
        out[i] = w[0]
    return out


def level_quantities(sol: SpectralSolution, fb: FilterBank, state: int = 0) -> dict:
    """Per-k W (kinetic/potential), R, lambda and alpha for wavelets at the solution level."""
    ham = sol.hamiltonian
    ks, W, R = cross_terms(sol, state, fb=fb)
    psi = sol.fine_vector(state, fb)
    lo = sol.layout.fine[0]
    args = (ham.model, fb, ham.table, psi, lo, sol.level, sol.level, int(ks[0]), int(ks[-1]))
    wkin = wavelet_terms(*args, part="kinetic")[0]
    wpot = wavelet_terms(*args, part="potential")[0]
    lam, a = alpha(float(sol.eigenvalues[state]), W, R)
    return {"k": ks, "x": 2.0 ** -sol.level * ks, "W": W, "Wkin": wkin, "Wpot": wpot,
            "R": R, "lambda": lam, "alpha": a}


def _aggregate(name: str, q: dict, k0: int) -> tuple[float, float]:
    i0 = int(np.searchsorted(q["k"], k0))
    if name in ("Wkin", "Wpot", "R", "alpha"):
        v = q[name]
        return float(np.max(np.abs(v))), float(v[i0])
    if name == "lambda":
        v = q["lambda"]
        return float(np.min(np.abs(v))), float(v[i0])
    if name == "alpha_weight":
        return float(np.sum(q["alpha"] ** 2)), float(q["alpha"][i0] ** 2)
    raise ValueError(f"unknown quantity {name!r}; choose from {QUANTITIES}")


def scaling_series(model: ModelSystem, fb: FilterBank, levels=range(0, 7), state: int = 0,
                   halfwidth: float = 8.0, quantities=QUANTITIES) -> dict:
    """ScalingFit for each quantity over the given source levels.

    ``aggregate`` is max |.| over k (min |.| for lambda, sum of squares for
    alpha_weight); ``at_center`` is the value at the wavelet centred nearest 0.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise InsufficientLevelsError("a scaling series needs at least 3 levels")
    k0 = center_shift(fb.support)
    per_level = [level_quantities(solution(model, fb, M, halfwidth), fb, state) for M in levels]
    fits = {}
    for name in quantities:
        agg, cen = zip(*(_aggregate(name, q, k0) for q in per_level))
        slope, icpt, res, _ = fit_log2_slope(levels, agg)
        fits[name] = ScalingFit(name, np.array(levels), np.array(agg), np.array(cen), slope, icpt, res)
    return fits


def predicted_weights(model: ModelSystem, fb: FilterBank, levels, state: int = 0,
                      halfwidth: float = 8.0) -> np.ndarray:
    """Sum over k of alpha_k^2 for each source level."""
    return np.array([np.sum(predict_level(solution(model, fb, M, halfwidth), state, fb=fb).coef ** 2)
                     for M in levels])


def exact_tail_weights(fb: FilterBank, levels, state: int = 0, omega: float = 1.0,
                       halfwidth: float = 8.0) -> np.ndarray:
    """Sum over k of (d^exact_{m,k})^2 for each wavelet level m."""
    from .basis import make_layout

    lay = make_layout(fb, max(levels) + 1, halfwidth)
    w = level_weights(project_exact(exact_state(state, omega), lay, fb), lay)
    return np.array([w[m] for m in levels])


# --- energy table -------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyTable:
    labels: tuple
    values: np.ndarray
    mode: str
    n_states: int

    def row(self, label: str) -> np.ndarray:
        return self.values[self.labels.index(label)]

    def eig(self, M: int) -> np.ndarray:
        return self.row(f"E[{M}]")

    def pred(self, M: int) -> np.ndarray:
        return self.row(f"Epred[{M}]")

    def to_csv(self) -> str:
        header = ["row_label"] + [f"state{i}" for i in range(self.n_states)]
        return csv_text(header, ([lab, *vals] for lab, vals in zip(self.labels, self.values)))


def energy_table(model: ModelSystem, fb: FilterBank, M_max: int = 4, n_states: int = 6,
                 mode: str = "additive", halfwidth: float = 8.0) -> EnergyTable:
    """Exact row, then E[0], and for each M >= 1 the prediction from M-1 followed by E[M]."""
    if model.omega is None:
        raise ValueError("the exact row needs a harmonic model")
    labels = ["exact"]
    rows = [(np.arange(n_states) + 0.5) * model.omega]
    for M in range(M_max + 1):
        sol = solution(model, fb, M, halfwidth, max(n_states, 6))
        if M > 0:
            prev = solution(model, fb, M - 1, halfwidth, max(n_states, 6))
            labels.append(f"Epred[{M}]")
            rows.append(np.array([predict_level(prev, i, mode, fb).e_pred for i in range(n_states)]))
        labels.append(f"E[{M}]")
        rows.append(np.array(sol.eigenvalues[:n_states]))
    return EnergyTable(tuple(labels), np.array(rows), mode, n_states)


# --- error versus norm --------------------------------------------------------------


def _on_level(c, lo, level, target, fb):
    return refine_to(c, lo, fb.h, target - level)


def _norm2_diff(a, alo, b, blo) -> float:
    lo = min(alo, blo)
    hi = max(alo + len(a), blo + len(b))
    x = np.zeros(hi - lo)
    y = np.zeros(hi - lo)
    x[alo - lo:alo - lo + len(a)] = a
    y[blo - lo:blo - lo + len(b)] = b
    return float(min(np.sum((x - y) ** 2), np.sum((x + y) ** 2)))


@dataclass(frozen=True)
class NormErrorSeries:
    points: list = field(repr=False)  # (state, level, norm2_diff, energy_err, source_tag)
    slopes: dict                       # state -> slope over all usable points
    eig_slopes: dict                   # state -> slope over eigensolve points only

    def to_csv(self) -> str:
        return csv_text(("state", "level", "norm2_diff", "energy_err", "source_tag"), self.points)


def _loglog_slope(pts):
    pts = [(n, e) for n, e in pts if n >= 1e-14 and e > 0]
    if len(pts) < 2:
        return float("nan")
    n, e = np.log10(np.array(pts)).T
    return float(np.polyfit(n, e, 1)[0])


def error_vs_norm(model: ModelSystem, fb: FilterBank, levels=range(2, 6), states=range(6),
                  truth_level: int = 7, mode: str = "additive", halfwidth: float = 8.0) -> NormErrorSeries:
    """Energy error against squared distance to a fine reference wave function.

    Eigenvectors at each level and their next-level predictions are compared
    with the ``truth_level`` eigenvector.  Points with a squared distance
    below 1e-14 are kept in the output but excluded from the fits.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise InsufficientLevelsError("need at least 3 levels")
    truth = solution(model, fb, truth_level, halfwidth)
    points = []
    for i in states:
        exact = (i + 0.5) * model.omega if model.omega else float(truth.eigenvalues[i])
        t, tlo = truth.fine_vector(i, fb), truth.layout.fine[0]
        for M in levels:
            sol = solution(model, fb, M, halfwidth)
            c, lo = _on_level(sol.fine_vector(i, fb), sol.layout.fine[0], M, truth_level, fb)
            points.append((i, M, _norm2_diff(c, lo, t, tlo), abs(float(sol.eigenvalues[i]) - exact), "eig"))
            rec = predict_level(sol, i, mode, fb)
            p = rec.psi / np.linalg.norm(rec.psi)
            c, lo = _on_level(p, rec.psi_lo, rec.psi_level, truth_level, fb)
            points.append((i, M + 1, _norm2_diff(c, lo, t, tlo), abs(rec.e_pred - exact), "pred"))
    slopes = {i: _loglog_slope([(p[2], p[3]) for p in points if p[0] == i]) for i in states}
    eig = {i: _loglog_slope([(p[2], p[3]) for p in points if p[0] == i and p[4] == "eig"]) for i in states}
    return NormErrorSeries(points, slopes, eig)


# --- figure data ----------------------------------------------------------------------


def fig1_rows(model, fb, levels, state=0, halfwidth=8.0):
    yield ("M", "k", "x", "W", "W_kin", "W_pot")
    for M in levels:
        q = level_quantities(solution(model, fb, M, halfwidth), fb, state)
        yield from ((M, *r) for r in zip(q["k"], q["x"], q["W"], q["Wkin"], q["Wpot"]))


def fig2_rows(model, fb, levels, state=0, halfwidth=8.0):
    yield ("M", "k", "x", "R", "lambda", "alpha")
    for M in levels:
        q = level_quantities(solution(model, fb, M, halfwidth), fb, state)
        yield from ((M, *r) for r in zip(q["k"], q["x"], q["R"], q["lambda"], q["alpha"]))


def fig3_rows(model, fb, levels, n_states=6, mode="additive", halfwidth=8.0):
    """Energy error of E[M] and of the prediction for level M made from M-1."""
    table = energy_table(model, fb, max(levels), n_states, mode, halfwidth)
    exact = table.row("exact")
    yield ("M", "state", "eig_err", "pred_err")
    for M in levels:
        pred = table.pred(M) - exact if M > 0 else np.full(n_states, np.nan)
        for i in range(n_states):
            yield (M, i, table.eig(M)[i] - exact[i], pred[i])


def fig4_rows(model, fb, levels, mode="additive", halfwidth=8.0):
    series = error_vs_norm(model, fb, levels, mode=mode, halfwidth=halfwidth)
    yield ("state", "level", "norm2_diff", "energy_err", "source_tag")
    yield from series.points


def _phase(sol: SpectralSolution, state: int, fb: FilterBank, omega: float) -> float:
    d = project_exact(exact_state(state, omega), sol.layout, fb)
    return 1.0 if float(sol.vectors[:, state] @ d) >= 0 else -1.0


@dataclass(frozen=True)
class CoefficientComparison:
    target: int
    k: np.ndarray
    d_exact: np.ndarray
    d_eig: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    beta_avg: np.ndarray

    @property
    def x(self):
        return 2.0 ** -(self.target - 1) * self.k

    def rms(self, name: str) -> float:
        return float(np.sqrt(np.mean((getattr(self, name) - self.d_exact) ** 2)))

    def rows(self):
        yield ("k", "x", "d_exact", "d_eig", "alpha", "beta", "beta_avg")
        yield from zip(self.k, self.x, self.d_exact, self.d_eig, self.alpha, self.beta, self.beta_avg)


def coefficient_comparison(model: ModelSystem, fb: FilterBank, target: int, state: int = 0,
                           mode: str = "additive", convention: str = "normalized",
                           window: int = 3, halfwidth: float = 8.0) -> CoefficientComparison:
    """Top-level wavelet coefficients (w_{target-1,k}) of a level-``target`` expansion.

    ``alpha`` comes from the level target-1 eigenvector, ``beta`` from the
    level target-2 eigenvector via its first prediction.
    """
    if target < 2:
        raise ValueError("target level must be >= 2")
    omega = model.omega or 1.0
    top = solution(model, fb, target, halfwidth)
    one = solution(model, fb, target - 1, halfwidth)
    two = solution(model, fb, target - 2, halfwidth)
    d_all = project_exact(exact_state(state, omega), top.layout, fb)
    k, d_exact = coefficient_block(d_all, top.layout, "w", target - 1)
    _, d_eig = coefficient_block(top.vectors[:, state] * _phase(top, state, fb, omega), top.layout, "w", target - 1)
    rec1 = predict_level(one, state, mode, fb)
    first = predict_level(two, state, mode, fb)
    rec2 = secondary_predict(first, two, convention, fb)
    for rec in (rec1, rec2):
        if not np.array_equal(rec.ks, k):
            raise ValueError("prediction window does not match the layout block")
    a = rec1.coef * _phase(one, state, fb, omega)
    b = rec2.coef * _phase(two, state, fb, omega)
    return CoefficientComparison(target, k, d_exact, d_eig, a, b, smooth_average(b, window))
