"""Independent reference values: analytic oscillator states and quadrature.

Nothing here uses connection coefficients.  Basis functions are sampled with
the cascade algorithm and integrals are done with the trapezoid rule, so
agreement with :mod:`wavepred.operators` is a genuine cross-check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import BasisLayout, DyadicSamples, analysis, cascade_evaluate
from .filters import FilterBank
from .operators import ModelSystem

MAX_STATE = 10


class GridMismatchError(ValueError):
    pass


class PrecisionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ExactState:
    index: int
    omega: float

    @property
    def energy(self) -> float:
        return (self.index + 0.5) * self.omega

    @property
    def norm(self) -> float:
        i = self.index
        return (self.omega / math.pi) ** 0.25 / math.sqrt(2.0 ** i * math.factorial(i))

    def hermite(self, y):
        """Physicists' H_i(y) by the three-term recursion."""
        y = np.asarray(y, dtype=float)
        prev, cur = np.zeros_like(y), np.ones_like(y)
        for n in range(self.index):
            prev, cur = cur, 2 * y * cur - 2 * n * prev
        return cur

    def __call__(self, x):
        y = math.sqrt(self.omega) * np.asarray(x, dtype=float)
        return self.norm * self.hermite(y) * np.exp(-0.5 * y * y)

    def derivative(self, x):
        # d/dx [H_i(y) e^{-y^2/2}] = sqrt(w) [2i H_{i-1}(y) - y H_i(y)] e^{-y^2/2}
        y = math.sqrt(self.omega) * np.asarray(x, dtype=float)
        lower = ExactState(self.index - 1, self.omega).hermite(y) if self.index else 0.0
        dh = 2 * self.index * lower - y * self.hermite(y)
        return self.norm * math.sqrt(self.omega) * dh * np.exp(-0.5 * y * y)


def exact_state(i: int, omega: float = 1.0) -> ExactState:
    if not 0 <= i <= MAX_STATE:
        raise ValueError(f"state index must be in 0..{MAX_STATE}")
    if not omega > 0:
        raise ValueError("omega must be positive")
    return ExactState(int(i), float(omega))


# --- sampled basis functions ----------------------------------------------------------


def basis_samples(fb: FilterBank, kind: str, level: int, k: int, grid: int) -> DyadicSamples:
    """Samples of s_{level,k} or w_{level,k} with spacing 2**-grid."""
    depth = grid - level
    if depth < 1:
        raise GridMismatchError("grid must be finer than the function level")
    which = {"s": "scaling", "w": "wavelet"}[kind]
    mother = cascade_evaluate(fb, which, depth)
    return DyadicSamples(grid, k * 2.0 ** -level, 2.0 ** (level / 2) * mother.values)


def expansion_samples(fb: FilterBank, coeffs: np.ndarray, lo: int, level: int, grid: int) -> DyadicSamples:
    """Samples of sum_k c_k s_{level,k} (k from ``lo``) with spacing 2**-grid."""
    s = basis_samples(fb, "s", level, 0, grid).values
    step = 2 ** (grid - level)
    out = np.zeros((len(coeffs) - 1) * step + len(s))
    for i, c in enumerate(coeffs):
        if c:
            out[i * step:i * step + len(s)] += c * s
    return DyadicSamples(grid, lo * 2.0 ** -level, out)


def _common(a: DyadicSamples, b: DyadicSamples):
    if a.level != b.level:
        raise GridMismatchError("samples live on different grids")
    h = a.spacing
    off = (b.origin - a.origin) / h
    if abs(off - round(off)) > 1e-9:
        raise GridMismatchError("sample origins are not aligned")
    ia, ib = 0, int(round(off))
    lo = min(ia, ib)
    hi = max(ia + len(a.values), ib + len(b.values))
    va, vb = np.zeros(hi - lo + 2), np.zeros(hi - lo + 2)
    # one zero pad on each side so second differences are defined at the ends
    va[ia - lo + 1:ia - lo + 1 + len(a.values)] = a.values
    vb[ib - lo + 1:ib - lo + 1 + len(b.values)] = b.values
    x = a.origin + h * (np.arange(hi - lo + 2) + lo - 1)
    return x, va, vb, h


def quad_matrix_element(bra: DyadicSamples, ket: DyadicSamples, operator: str,
                        model: ModelSystem) -> float:
    """Trapezoid estimate of <bra|op|ket>.

    ``kinetic`` uses centred second differences of the ket, so its error is
    dominated by the finite-difference term, which for Daubechies functions
    decays roughly like 2**(-1.5 J).  See :func:`extrapolated_element`.
    """
    x, a, b, h = _common(bra, ket)
    if operator == "kinetic":
        d2 = np.zeros_like(b)
        d2[1:-1] = (b[2:] - 2 * b[1:-1] + b[:-2]) / (h * h)
        return float(-0.5 * h * np.sum(a * d2))
    if operator == "potential":
        f = a * model.potential(x) * b
        return float(h * (np.sum(f) - 0.5 * (f[0] + f[-1])))
    if operator == "overlap":
        return float(h * np.sum(a * b))
    raise ValueError(f"unknown operator {operator!r}")


def aitken(e0: float, e1: float, e2: float) -> float:
    """Limit of a geometrically converging sequence from three terms."""
    den = (e2 - e1) - (e1 - e0)
    if den == 0:
        return e2
    return e2 - (e2 - e1) ** 2 / den


def extrapolated_element(fb: FilterBank, bra: tuple[str, int, int], ket: tuple[str, int, int],
                         operator: str, model: ModelSystem, depths=(11, 12, 13)) -> float:
    """Quadrature matrix element between two basis functions.

    The grid depth is counted from the finer of the two functions.  Kinetic
    values are extrapolated from three depths; other operators use the last.
    """
    top = max(bra[1], ket[1])
    vals = []
    for j in depths if operator == "kinetic" else depths[-1:]:
        a = basis_samples(fb, *bra, grid=top + j)
        b = basis_samples(fb, *ket, grid=top + j)
        vals.append(quad_matrix_element(a, b, operator, model))
    return aitken(*vals) if len(vals) == 3 else vals[-1]


# --- projection of analytic states --------------------------------------------------


def _fine_coefficients(state, fb: FilterBank, level: int, lo: int, hi: int, depth: int) -> np.ndarray:
    """c_k = <psi, s_{level,k}> for k in [lo, hi] by the trapezoid rule."""
    s = cascade_evaluate(fb, "scaling", depth)
    u = s.x
    w = np.full(len(u), s.spacing)
    w[[0, -1]] *= 0.5
    ks = np.arange(lo, hi + 1)
    scale = 2.0 ** (-level)
    out = np.empty(len(ks))
    for i0 in range(0, len(ks), 256):
        kk = ks[i0:i0 + 256, None]
        out[i0:i0 + 256] = (state(scale * (u[None, :] + kk)) * s.values) @ w
    return 2.0 ** (-level / 2) * out


def project_exact(state, layout: BasisLayout, fb: FilterBank, depth: int = 10,
                  tol: float = 1e-8) -> np.ndarray:
    """Multilevel coefficients of ``state`` (a callable) on ``layout``.

    Warns with :class:`PrecisionWarning` if halving the quadrature step
    changes any fine coefficient by more than ``tol``.
    """
    lo, hi = layout.fine
    fine = _fine_coefficients(state, fb, layout.top_level, lo, hi, depth)
    coarse = _fine_coefficients(state, fb, layout.top_level, lo, hi, depth - 1)
    if np.max(np.abs(fine - coarse), initial=0.0) > tol:
        warnings.warn(f"quadrature depth {depth} may be insufficient", PrecisionWarning)
    return analysis(fine, layout, fb)


def coefficient_block(coeffs: np.ndarray, layout: BasisLayout, kind: str, level: int):
    """(k values, coefficients) of one block of a multilevel vector."""
    b = layout.block(kind, level)
    return np.arange(b.kmin, b.kmax + 1), coeffs[b.offset:b.offset + b.size]


def level_weights(coeffs: np.ndarray, layout: BasisLayout) -> dict:
    """Sum of squared wavelet coefficients per level."""
    return {m: float(np.sum(coefficient_block(coeffs, layout, "w", m)[1] ** 2))
            for m in range(layout.top_level)}
