"""Scaling functions, wavelets, moments and the multilevel pyramid transform."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import ceil, comb, floor, sqrt

import numpy as np

from .filters import FilterBank

SQRT2 = sqrt(2.0)
DEFAULT_DEPTH = 10


class NumericalDegeneracyError(ArithmeticError):
    pass


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class DyadicSamples:
    """Values ``v[j] = f(origin + j * 2**-level)``."""
    level: int
    origin: float
    values: np.ndarray

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.level

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(len(self.values))

    def trapezoid(self, weight: np.ndarray | None = None) -> float:
        f = self.values if weight is None else self.values * weight
        return float(self.spacing * (f.sum() - 0.5 * (f[0] + f[-1])))


@dataclass(frozen=True)
class MomentTable:
    scaling: np.ndarray
    wavelet: np.ndarray


def integer_values(fb: FilterBank) -> np.ndarray:
    """s(0), s(1), ..., s(N_s), normalised to sum 1."""
    ns = fb.support
    if ns == 1:
        # Haar: the refinement operator is the identity; take the right-continuous indicator
        return np.array([1.0, 0.0])
    h = fb.h
    a = np.zeros((ns - 1, ns - 1))
    for j in range(1, ns):
        for k in range(1, ns):
            if 0 <= 2 * j - k <= ns:
                a[j - 1, k - 1] = SQRT2 * h[2 * j - k]
    evals, evecs = np.linalg.eig(a)
    dist = np.abs(evals - 1.0)
    order = np.argsort(dist)
    if dist[order[0]] > 1e-8 or (len(dist) > 1 and dist[order[1]] < 1e-6):
        raise NumericalDegeneracyError("refinement matrix has no simple eigenvalue 1")
    v = np.real(evecs[:, order[0]])
    v = v / v.sum()
    return np.concatenate([[0.0], v, [0.0]])


def _refine(cur: np.ndarray, h: np.ndarray, j: int) -> np.ndarray:
    """One dyadic subdivision step, level j-1 -> j, on the support [0, N_s]."""
    ns = len(h) - 1
    new = np.zeros(ns * 2 ** j + 1)
    new[::2] = cur
    odd = 2 * np.arange(ns * 2 ** (j - 1)) + 1
    step = 2 ** (j - 1)
    acc = np.zeros(len(odd))
    for i, hi in enumerate(h):
        idx = odd - i * step
        ok = (idx >= 0) & (idx < len(cur))
        acc[ok] += hi * cur[idx[ok]]
    new[1::2] = SQRT2 * acc
    return new


def _scaling_samples(fb: FilterBank, depth: int) -> np.ndarray:
    cur = integer_values(fb)
    for j in range(1, depth + 1):
        cur = _refine(cur, fb.h, j)
    return cur


_SAMPLE_CACHE: dict = {}


def cascade_evaluate(fb: FilterBank, which: str = "scaling", depth: int = DEFAULT_DEPTH) -> DyadicSamples:
    """Samples of the mother scaling function or wavelet on [0, N_s] with spacing 2**-depth."""
    if depth < 1:
        raise ValueError("cascade depth must be >= 1")
    if which not in ("scaling", "wavelet"):
        raise ValueError(f"which must be 'scaling' or 'wavelet', got {which!r}")
    key = (fb, which, depth)
    if key in _SAMPLE_CACHE:
        return _SAMPLE_CACHE[key]
    s = _scaling_samples(fb, depth)
    if which == "scaling":
        vals = s
    else:
        n = len(s)
        j2 = 2 * np.arange(n)
        vals = np.zeros(n)
        for i, gi in enumerate(fb.g):
            idx = j2 - i * 2 ** depth
            ok = (idx >= 0) & (idx < n)
            vals[ok] += gi * s[idx[ok]]
        vals *= SQRT2
    vals.setflags(write=False)
    out = DyadicSamples(depth, 0.0, vals)
    _SAMPLE_CACHE[key] = out
    return out


def refinement_residual(fb: FilterBank, samples: DyadicSamples) -> float:
    """max |s(x) - sqrt2 sum_i h_i s(2x - i)| over the sample grid."""
    s = samples.values
    n = len(s)
    half = 2 ** (samples.level - 1)
    j = np.arange(n)
    acc = np.zeros(n)
    for i, hi in enumerate(fb.h):
        # 2x - i on the same grid: index 2j - i*2**level
        idx = 2 * j - i * 2 * half
        ok = (idx >= 0) & (idx < n)
        acc[ok] += hi * s[idx[ok]]
    return float(np.max(np.abs(s - SQRT2 * acc)))


def compute_moments(fb: FilterBank, n_max: int) -> MomentTable:
    """Moments of s and w from the two-scale relation (no quadrature)."""
    if n_max > 12:
        raise ValueError("n_max must be <= 12")
    idx = np.arange(fb.support + 1, dtype=float)
    m = [1.0]
    for n in range(1, n_max + 1):
        inner = sum(comb(n, j) * idx ** (n - j) * m[j] for j in range(n))
        m.append(2.0 ** (-n - 1) * SQRT2 * float(fb.h @ inner) / (1.0 - 2.0 ** -n))
    mu = []
    for n in range(n_max + 1):
        inner = sum(comb(n, j) * idx ** (n - j) * m[j] for j in range(n + 1))
        mu.append(2.0 ** (-n - 1) * SQRT2 * float(fb.g @ inner))
    return MomentTable(np.array(m), np.array(mu))


# --- multilevel layout and pyramid -------------------------------------------------


@dataclass(frozen=True)
class Block:
    kind: str  # "s" or "w"
    level: int
    kmin: int
    kmax: int
    offset: int

    @property
    def size(self) -> int:
        return self.kmax - self.kmin + 1


def window(halfwidth: float, level: int, support: int) -> tuple[int, int]:
    scale = 2.0 ** level
    return ceil(-halfwidth * scale) - support, floor(halfwidth * scale)


@dataclass(frozen=True)
class BasisLayout:
    """Truncated multilevel basis: s_{0,k} plus w_{m,k} for m < top_level.

    Each window keeps the shifts whose support meets [-halfwidth, halfwidth].
    ``fine`` is the level-``top_level`` scaling window that spans every
    retained function; it is where single-level operators live.
    """
    support: int
    top_level: int
    halfwidth: float
    blocks: tuple[Block, ...] = field(repr=False)
    ranges: tuple[tuple[int, int], ...] = field(repr=False)

    @property
    def dim(self) -> int:
        last = self.blocks[-1]
        return last.offset + last.size

    @property
    def fine(self) -> tuple[int, int]:
        return self.ranges[self.top_level]

    @property
    def fine_dim(self) -> int:
        lo, hi = self.fine
        return hi - lo + 1

    def block(self, kind: str, level: int) -> Block:
        for b in self.blocks:
            if b.kind == kind and b.level == level:
                return b
        raise LayoutError(f"no {kind}-block at level {level}")

    def labels(self) -> list[tuple[str, int, int]]:
        return [(b.kind, b.level, k) for b in self.blocks for k in range(b.kmin, b.kmax + 1)]

    def position(self, kind: str, level: int, k: int) -> int | None:
        try:
            b = self.block(kind, level)
        except LayoutError:
            return None
        if b.kmin <= k <= b.kmax:
            return b.offset + k - b.kmin
        return None

    @cached_property
    def synthesis_matrix(self) -> np.ndarray:
        """Columns: fine-level scaling coefficients of each multilevel basis function."""
        return synthesis(np.eye(self.dim), self)


def make_layout(fb: FilterBank, top_level: int, halfwidth: float) -> BasisLayout:
    if top_level < 0:
        raise LayoutError("top level must be >= 0")
    if not halfwidth > 0:
        raise LayoutError("domain half-width must be positive")
    ns = fb.support
    blocks = []
    off = 0
    lo, hi = window(halfwidth, 0, ns)
    if hi < lo:
        raise LayoutError("empty scaling window at level 0")
    blocks.append(Block("s", 0, lo, hi, off))
    off += hi - lo + 1
    ranges = [(lo, hi)]
    for m in range(top_level):
        wlo, whi = window(halfwidth, m, ns)
        if whi < wlo:
            raise LayoutError(f"empty wavelet window at level {m}")
        blocks.append(Block("w", m, wlo, whi, off))
        off += whi - wlo + 1
        clo, chi = ranges[-1]
        ranges.append((min(2 * clo, 2 * wlo), max(2 * chi, 2 * whi) + ns))
    return BasisLayout(ns, top_level, float(halfwidth), tuple(blocks), tuple(ranges))


def upsample(c: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Coefficients at level m+1 of sum_l c_l f-expansion; output starts at index 2*lo."""
    n = c.shape[0]
    out = np.zeros((2 * (n - 1) + len(f),) + c.shape[1:])
    for i, fi in enumerate(f):
        out[i:i + 2 * n - 1:2] += fi * c
    return out


def downsample(v: np.ndarray, vlo: int, f: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """out[l] = sum_i f_i v[2l + i] for l in [lo, hi]; v is indexed from vlo, zero outside."""
    n = v.shape[0]
    out = np.zeros((hi - lo + 1,) + v.shape[1:])
    ls = np.arange(lo, hi + 1)
    for i, fi in enumerate(f):
        idx = 2 * ls + i - vlo
        ok = (idx >= 0) & (idx < n)
        out[ok] += fi * v[idx[ok]]
    return out


def _place(target: np.ndarray, tlo: int, src: np.ndarray, slo: int) -> None:
    target[slo - tlo:slo - tlo + src.shape[0]] += src


def synthesis(u: np.ndarray, layout: BasisLayout, fb: FilterBank | None = None) -> np.ndarray:
    h, g = _filters(layout, fb)
    u = np.asarray(u, dtype=float)
    if u.shape[0] != layout.dim:
        raise LayoutError(f"expected {layout.dim} multilevel coefficients, got {u.shape[0]}")
    b0 = layout.blocks[0]
    cur = u[b0.offset:b0.offset + b0.size]
    for m in range(layout.top_level):
        b = layout.block("w", m)
        lo, hi = layout.ranges[m + 1]
        nxt = np.zeros((hi - lo + 1,) + u.shape[1:])
        _place(nxt, lo, upsample(cur, h), 2 * layout.ranges[m][0])
        _place(nxt, lo, upsample(u[b.offset:b.offset + b.size], g), 2 * b.kmin)
        cur = nxt
    return cur


def analysis(v: np.ndarray, layout: BasisLayout, fb: FilterBank | None = None) -> np.ndarray:
    h, g = _filters(layout, fb)
    v = np.asarray(v, dtype=float)
    if v.shape[0] != layout.fine_dim:
        raise LayoutError(f"expected {layout.fine_dim} level-{layout.top_level} coefficients, got {v.shape[0]}")
    out = np.zeros((layout.dim,) + v.shape[1:])
    cur = v
    for m in range(layout.top_level - 1, -1, -1):
        vlo = layout.ranges[m + 1][0]
        b = layout.block("w", m)
        out[b.offset:b.offset + b.size] = downsample(cur, vlo, g, b.kmin, b.kmax)
        lo, hi = layout.ranges[m]
        cur = downsample(cur, vlo, h, lo, hi)
    b0 = layout.blocks[0]
    out[b0.offset:b0.offset + b0.size] = cur
    return out


def multilevel_transform(v: np.ndarray, layout: BasisLayout, direction: str = "analysis",
                         fb: FilterBank | None = None) -> np.ndarray:
    """Pyramid map between the fine single-level window and the multilevel ordering.

    ``synthesis`` is an exact isometry; ``analysis`` is its adjoint, so
    ``analysis(synthesis(u)) == u`` and analysis is norm-preserving on the
    span of the layout.
    """
    if direction == "analysis":
        return analysis(v, layout, fb)
    if direction == "synthesis":
        return synthesis(v, layout, fb)
    raise ValueError(f"direction must be 'analysis' or 'synthesis', got {direction!r}")


def _filters(layout: BasisLayout, fb: FilterBank | None):
    if fb is None:
        from .filters import build_filter
        fb = build_filter((layout.support + 1) // 2)
    if fb.support != layout.support:
        raise LayoutError("filter bank does not match layout support")
    return fb.h, fb.g
