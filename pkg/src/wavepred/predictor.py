"""Closed-form prediction of next-level wavelet coefficients.

Adding a single wavelet ``w`` with coefficient ``a`` to a normalised state of
energy ``E`` (with ``<w|Psi> = 0``) gives the energy

    E(a) = (E + 2 a R + a^2 W) / (1 + a^2),   W = <w|H|w>,  R = <w|H|Psi>.

Its stationary points solve ``R a^2 - (W - E) a - R = 0``.  The minimiser is
the root whose sign is opposite to ``R``; with ``lam = (E - W) / (2 R)`` it is
``-lam - sqrt(lam^2 + 1)`` for ``R > 0`` and ``-lam + sqrt(lam^2 + 1)`` for
``R < 0``, which behaves as ``1 / (2 lam)`` when ``|lam|`` is large.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .basis import window
from .eigen import SpectralSolution
from .filters import FilterBank, build_filter
from .operators import apply_single_level, refine_to, wavelet_terms

MODES = ("additive", "rayleigh", "projected")
ORTHO_TOL = 1e-10


class DegeneracyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    source_level: int
    state: int
    wavelet_level: int
    ks: np.ndarray
    W: np.ndarray
    R: np.ndarray
    lam: np.ndarray
    coef: np.ndarray
    energy: float          # energy the coefficients were optimised against
    e_pred: float
    mode: str
    stage: str             # "first" | "secondary"
    psi: np.ndarray = field(repr=False)   # level (wavelet_level + 1) scaling coefficients
    psi_lo: int = 0
    halfwidth: float = 8.0

    @property
    def psi_level(self) -> int:
        return self.wavelet_level + 1

    @property
    def x(self) -> np.ndarray:
        """Normalised position 2^-m k of each candidate wavelet."""
        return 2.0 ** -self.wavelet_level * self.ks

    def single_energies(self) -> np.ndarray:
        return single_energy(self.energy, self.W, self.R, self.coef)

    def rows(self):
        name = "alpha" if self.stage == "first" else "beta"
        yield ("k", "x", "W", "R", "lambda", name)
        for row in zip(self.ks, self.x, self.W, self.R, self.lam, self.coef):
            yield row

    def to_dict(self) -> dict:
        return {
            "format": "wavepred-prediction", "version": 1,
            "source_level": self.source_level, "state": self.state,
            "wavelet_level": self.wavelet_level, "mode": self.mode, "stage": self.stage,
            "energy": self.energy, "e_pred": self.e_pred, "halfwidth": self.halfwidth,
            "k": self.ks.tolist(), "W": self.W.tolist(), "R": self.R.tolist(),
            "lambda": [float(v) for v in self.lam], "coef": self.coef.tolist(),
            "psi_lo": self.psi_lo, "psi": self.psi.tolist(),
        }


def alpha(energy, W, R):
    """(lam, a): the energy-minimising single-wavelet coefficient.

    ``a = 0`` where ``R == 0`` (``lam`` is then +-inf).
    """
    W = np.asarray(W, dtype=float)
    R = np.asarray(R, dtype=float)
    diff = energy - W
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(R != 0, diff / (2 * R), np.copysign(np.inf, diff))
        s = np.sign(R)
        root = np.hypot(lam, 1.0)
        # -lam - s*root and 1/(lam - s*root) are equal; use the form without cancellation
        a = np.where(lam * s > 0, -lam - s * root, 1.0 / (lam - s * root))
        a = np.where(R != 0, a, 0.0)
    if a.ndim == 0:
        return float(lam), float(a)
    return lam, a


def single_energy(energy, W, R, a):
    a = np.asarray(a, dtype=float)
    return (energy + 2 * a * R + a * a * W) / (1 + a * a)


def stationarity_residual(energy, W, R, a):
    return R * a * a - (W - energy) * a - R


def _candidates(halfwidth: float, level: int, support: int) -> tuple[int, int]:
    return window(halfwidth, level, support)


def cross_terms(solution: SpectralSolution, state: int, target: int | None = None,
                fb: FilterBank | None = None, part: str = "full"):
    """(ks, W, R) for wavelets w_{target,k} against eigenstate ``state``.

    ``target`` defaults to the solution level M; M+1 is also allowed.
    """
    if not 0 <= state < solution.n_states:
        raise IndexError(f"state {state} out of range 0..{solution.n_states - 1}")
    fb = fb or build_filter((solution.layout.support + 1) // 2)
    target = solution.level if target is None else target
    if target not in (solution.level, solution.level + 1):
        raise ValueError("target must be M or M+1")
    ham = solution.hamiltonian
    psi = solution.fine_vector(state, fb)
    kmin, kmax = _candidates(solution.layout.halfwidth, target, fb.support)
    W, R, ov = wavelet_terms(ham.model, fb, ham.table, psi, solution.layout.fine[0],
                             solution.level, target, kmin, kmax, part)
    _check_orthogonal(ov)
    return np.arange(kmin, kmax + 1), W, R


def _check_orthogonal(ov):
    if len(ov) and np.max(np.abs(ov)) > ORTHO_TOL:
        raise DegeneracyError("candidate wavelets are not orthogonal to the state")


def _add_wavelets(psi, lo, fb, wlevel, ks, coef):
    """psi (level wlevel+1, from lo) + sum_k coef_k w_{wlevel,k}."""
    kmin = int(ks[0]) if len(ks) else 0
    wav = np.zeros(2 * (len(coef) - 1) + len(fb.g)) if len(coef) else np.zeros(0)
    for i, gi in enumerate(fb.g):
        wav[i:i + 2 * len(coef) - 1:2] += gi * coef
    wlo = 2 * kmin
    new_lo = min(lo, wlo)
    new_hi = max(lo + len(psi), wlo + len(wav))
    out = np.zeros(new_hi - new_lo)
    out[lo - new_lo:lo - new_lo + len(psi)] += psi
    out[wlo - new_lo:wlo - new_lo + len(wav)] += wav
    return out, new_lo


def _rayleigh(model, ct, level, c, lo):
    hc, hlo = apply_single_level(model, ct, level, c, lo)
    num = hc[lo - hlo:lo - hlo + len(c)] @ c
    return float(num / (c @ c))


def _energy(mode, energy, W, R, coef, model, ct, level, phi, lo, norm2=1.0):
    if mode == "additive":
        return float(energy + np.sum(single_energy(energy, W, R, coef) - energy))
    if mode == "projected":
        # <Phi|H|Psi> / <Phi|Phi> with Psi normalised
        return float((energy + coef @ R) / (1.0 + coef @ coef))
    if mode == "rayleigh":
        return _rayleigh(model, ct, level, phi, lo)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def predict_level(solution: SpectralSolution, state: int, mode: str = "additive",
                  fb: FilterBank | None = None) -> PredictionRecord:
    """Predict the level-M wavelet coefficients of eigenstate ``state``.

    ``e_pred`` is the corresponding estimate of the level-(M+1) energy.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    fb = fb or build_filter((solution.layout.support + 1) // 2)
    M = solution.level
    ks, W, R = cross_terms(solution, state, M, fb)
    energy = float(solution.eigenvalues[state])
    lam, coef = alpha(energy, W, R)
    psi, lo = refine_to(solution.fine_vector(state, fb), solution.layout.fine[0], fb.h, 1)
    phi, plo = _add_wavelets(psi, lo, fb, M, ks, coef)
    ham = solution.hamiltonian
    e_pred = _energy(mode, energy, W, R, coef, ham.model, ham.table, M + 1, phi, plo)
    return PredictionRecord(M, state, M, ks, W, R, lam, coef, energy, e_pred, mode, "first",
                            phi, plo, solution.layout.halfwidth)


def select_indices(record: PredictionRecord, threshold: float) -> np.ndarray:
    """Shifts k with |coef_k| >= threshold * max |coef| (ties included), sorted."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if len(record.coef) == 0:
        return np.array([], dtype=int)
    mag = np.abs(record.coef)
    top = mag.max()
    if top == 0:
        return np.array([], dtype=int)
    return np.sort(record.ks[mag >= threshold * top])


def secondary_predict(record: PredictionRecord, solution: SpectralSolution,
                      convention: str = "normalized", fb: FilterBank | None = None) -> PredictionRecord:
    """Second-step coefficients on w_{M+1,k} starting from the first prediction.

    ``normalized``: optimise against Psi_pred / |Psi_pred| and rescale the
    coefficients by |Psi_pred|.  ``verbatim``: apply the closed form to the
    unnormalised Psi_pred directly.
    """
    if convention not in ("normalized", "verbatim"):
        raise ValueError("convention must be 'normalized' or 'verbatim'")
    fb = fb or build_filter((solution.layout.support + 1) // 2)
    ham = solution.hamiltonian
    nrm = float(np.linalg.norm(record.psi))
    if nrm == 0:
        raise DegeneracyError("predicted wave function has zero norm")
    wl = record.wavelet_level + 1
    kmin, kmax = _candidates(record.halfwidth, wl, fb.support)
    W, R, ov = wavelet_terms(ham.model, fb, ham.table, record.psi, record.psi_lo,
                             record.psi_level, wl, kmin, kmax)
    _check_orthogonal(ov / nrm)
    ks = np.arange(kmin, kmax + 1)
    energy = record.e_pred
    if convention == "normalized":
        lam, b = alpha(energy, W, R / nrm)
        coef = nrm * b
        e_terms = (b, R / nrm)
    else:
        lam, coef = alpha(energy, W, R)
        e_terms = (coef, R)
    phi, plo = _add_wavelets(record.psi, record.psi_lo, fb, wl, ks, coef)
    e_pred = _energy(record.mode, energy, W, e_terms[1], e_terms[0], ham.model, ham.table,
                     wl + 1, phi, plo)
    return PredictionRecord(record.source_level, record.state, wl, ks, W, R, lam, coef, energy,
                            e_pred, record.mode, "secondary", phi, plo, record.halfwidth)


def smooth_average(values, window: int = 3) -> np.ndarray:
    """Centred moving average; the window shrinks at the ends."""
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    v = np.asarray(values, dtype=float)
    n = len(v)
    r = window // 2
    csum = np.concatenate([[0.0], np.cumsum(v)])
    i = np.arange(n)
    lo = np.maximum(i - r, 0)
    hi = np.minimum(i + r, n - 1) + 1
    return (csum[hi] - csum[lo]) / (hi - lo)


def with_coefficients(record: PredictionRecord, coef: np.ndarray, fb: FilterBank,
                      base: np.ndarray, base_lo: int) -> PredictionRecord:
    """Copy of ``record`` whose wave function is ``base`` plus ``coef`` wavelets."""
    phi, plo = _add_wavelets(base, base_lo, fb, record.wavelet_level, record.ks, coef)
    return replace(record, coef=np.asarray(coef, dtype=float), psi=phi, psi_lo=plo)
