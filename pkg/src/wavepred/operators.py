"""Galerkin matrices of -1/2 d^2/dx^2 + V(x), V a polynomial of degree <= 2.

Every matrix element is reduced to three families of integer-shift
integrals of the scaling function, obtained exactly from the two-scale
relation:

    Lambda_d = int s(x) s''(x - d) dx
    T_n(d)   = int s(x) x^n s(x - d) dx,   n = 0, 1, 2
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .basis import BasisLayout, LayoutError, compute_moments, downsample, synthesis, upsample
from .filters import FilterBank


class SmoothnessError(ValueError):
    pass


class UnsupportedPotentialError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSystem:
    """V(x) = v0 + v1 x + v2 x^2 (hartree, bohr)."""
    v0: float = 0.0
    v1: float = 0.0
    v2: float = 0.5
    kind: str = "polynomial"
    omega: float | None = None

    @classmethod
    def harmonic(cls, omega: float = 1.0) -> "ModelSystem":
        if not omega > 0:
            raise ValueError("omega must be positive")
        return cls(0.0, 0.0, 0.5 * omega * omega, "harmonic-oscillator", float(omega))

    @classmethod
    def polynomial(cls, coeffs) -> "ModelSystem":
        coeffs = list(coeffs)
        while len(coeffs) > 3 and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) > 3:
            raise UnsupportedPotentialError("potential degree must be <= 2")
        coeffs += [0.0] * (3 - len(coeffs))
        return cls(*map(float, coeffs))

    def potential(self, x):
        return self.v0 + self.v1 * x + self.v2 * x * x

    def to_dict(self) -> dict:
        return {"kind": self.kind, "omega": self.omega, "v0": self.v0, "v1": self.v1, "v2": self.v2}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSystem":
        return cls(d["v0"], d["v1"], d["v2"], d.get("kind", "polynomial"), d.get("omega"))


@dataclass(frozen=True)
class ConnectionTable:
    genus: int
    lam: np.ndarray  # index d + N_s - 1
    t: np.ndarray    # shape (3, 2 N_s - 1)

    @property
    def reach(self) -> int:
        return (len(self.lam) - 1) // 2

    @property
    def shifts(self) -> np.ndarray:
        r = self.reach
        return np.arange(-r, r + 1)

    def L(self, d):
        return _lookup(self.lam, self.reach, d)

    def T(self, n: int, d):
        return _lookup(self.t[n], self.reach, d)


def _lookup(arr, reach, d):
    d = np.asarray(d)
    ok = np.abs(d) <= reach
    out = np.where(ok, arr[np.clip(d + reach, 0, 2 * reach)], 0.0)
    return out if out.ndim else float(out)


def _transition(h, dps):
    import mpmath as mp

    ns = len(h) - 1
    r = ns - 1
    n = 2 * r + 1
    a = mp.zeros(n, n)
    for row, d in enumerate(range(-r, r + 1)):
        for i in range(ns + 1):
            for j in range(ns + 1):
                e = 2 * d + j - i
                if abs(e) <= r:
                    a[row, e + r] += h[i] * h[j]
    return a


def _constrained_solve(mat, rhs, constraint, value):
    """Solve a rank-deficient (by one) system with one extra normalising row."""
    import mpmath as mp

    n = mat.rows
    aug = mp.zeros(n + 1, n)
    b = mp.zeros(n + 1, 1)
    for i in range(n):
        for j in range(n):
            aug[i, j] = mat[i, j]
        b[i] = rhs[i]
    for j in range(n):
        aug[n, j] = constraint[j]
    b[n] = value
    x, _ = mp.qr_solve(aug, b)
    return x


@lru_cache(maxsize=None)
def connection_table(fb: FilterBank, dps: int = 40) -> ConnectionTable:
    """Exact Lambda and T_0..T_2 tables from the refinement equation."""
    import mpmath as mp

    if fb.genus < 3:
        raise SmoothnessError("connection coefficients need genus >= 3")
    with mp.workdps(dps):
        h = [mp.mpf(repr(float(c))) for c in fb.h]
        ns = len(h) - 1
        r = ns - 1
        ds = list(range(-r, r + 1))
        n = len(ds)
        a = _transition(h, dps)
        eye = mp.eye(n)
        hh = lambda i: h[i] if 0 <= i <= ns else mp.mpf(0)

        # moments at working precision
        m = [mp.mpf(1)]
        for k in range(1, 5):
            acc = mp.fsum(h[i] * mp.fsum(mp.binomial(k, j) * mp.mpf(i) ** (k - j) * m[j] for j in range(k))
                          for i in range(ns + 1))
            m.append(2 ** (-k - 1) * mp.sqrt(2) * acc / (1 - mp.mpf(2) ** -k))

        lam = _constrained_solve(4 * a - eye, [0] * n, [d * d for d in ds], 2)

        rhs1 = [mp.fsum(h[i] * hh(i - 2 * d) * i for i in range(ns + 1)) / 2 for d in ds]
        t1 = _constrained_solve(eye - a / 2, rhs1, ds, m[2] - m[1] ** 2)

        rhs2 = []
        for d in ds:
            acc = mp.mpf(0)
            for i in range(ns + 1):
                for j in range(ns + 1):
                    e = 2 * d + j - i
                    if abs(e) <= r:
                        acc += h[i] * h[j] * 2 * i * t1[e + r]
                acc += h[i] * hh(i - 2 * d) * i * i
            rhs2.append(acc / 4)
        t2 = _constrained_solve(eye - a / 4, rhs2, [d * d for d in ds],
                                m[4] - 2 * m[1] * m[3] + (2 * m[1] ** 2 - m[2]) * m[2])

        lam_f = np.array([float(x) for x in lam])
        lam_f = 0.5 * (lam_f + lam_f[::-1])
        t = np.zeros((3, n))
        t[0, r] = 1.0
        t[1] = [float(x) for x in t1]
        t[2] = [float(x) for x in t2]
    for arr in (lam_f, t):
        arr.setflags(write=False)
    return ConnectionTable(fb.genus, lam_f, t)


def format_connection_table(ct: ConnectionTable) -> str:
    lines = [f"conntab v1 genus={ct.genus}"]
    for d in ct.shifts:
        lines.append(f"L {d} {ct.L(d):.16e}")
    for n in range(3):
        for d in ct.shifts:
            lines.append(f"T {n} {d} {ct.T(n, d):.16e}")
    return "\n".join(lines) + "\n"


def parse_connection_table(text: str) -> ConnectionTable:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0]
    if head[:2] != ["conntab", "v1"] or not head[2].startswith("genus="):
        raise ValueError("not a conntab v1 file")
    genus = int(head[2].split("=", 1)[1])
    r = 2 * genus - 2
    lam = np.zeros(2 * r + 1)
    t = np.zeros((3, 2 * r + 1))
    for parts in lines[1:]:
        if parts[0] == "L":
            lam[int(parts[1]) + r] = float(parts[2])
        elif parts[0] == "T":
            t[int(parts[1]), int(parts[2]) + r] = float(parts[3])
        else:
            raise ValueError(f"bad conntab line: {' '.join(parts)}")
    return ConnectionTable(genus, lam, t)


def load_or_build_table(fb: FilterBank, cache_dir: Path | None = None) -> ConnectionTable:
    if cache_dir is None:
        return connection_table(fb)
    path = Path(cache_dir) / f"conntab_p{fb.genus:02d}.txt"
    if path.exists():
        return parse_connection_table(path.read_text())
    ct = connection_table(fb)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(format_connection_table(ct))
    tmp.replace(path)
    return ct


# --- single-level operator -------------------------------------------------------


def entries(model: ModelSystem, ct: ConnectionTable, level: int, k, d, part: str = "full"):
    """<s_{level,k}| H |s_{level,k+d}> (vectorised over k and d)."""
    k = np.asarray(k, dtype=float)
    d = np.asarray(d)
    delta = (d == 0).astype(float)
    kin = -0.5 * 4.0 ** level * ct.L(d)
    if part == "kinetic":
        return kin + 0 * k
    s = 2.0 ** -level
    t1 = ct.T(1, d)
    pot = (model.v2 * s * s * (ct.T(2, d) + 2 * k * t1 + k * k * delta)
           + model.v1 * s * (t1 + k * delta) + model.v0 * delta)
    if part == "potential":
        return pot
    return kin + pot


def apply_single_level(model: ModelSystem, ct: ConnectionTable, level: int,
                       c: np.ndarray, lo: int, part: str = "full") -> tuple[np.ndarray, int]:
    """H c for level-``level`` scaling coefficients indexed from ``lo``.

    Returns the full (untruncated) result and its first index.
    """
    r = ct.reach
    n = c.shape[0]
    out_lo = lo - r
    ks = np.arange(out_lo, lo + n + r)
    out = np.zeros((len(ks),) + c.shape[1:])
    for d in range(-r, r + 1):
        # out[k] += H(k, k+d) c[k+d]
        src = ks + d - lo
        ok = (src >= 0) & (src < n)
        coef = entries(model, ct, level, ks[ok], d, part)
        out[ok] += coef.reshape((-1,) + (1,) * (c.ndim - 1)) * c[src[ok]]
    return out, out_lo


def dense_single_level(model: ModelSystem, ct: ConnectionTable, level: int, lo: int, hi: int,
                       part: str = "full") -> np.ndarray:
    ks = np.arange(lo, hi + 1)
    kk, ll = np.meshgrid(ks, ks, indexing="ij")
    d = ll - kk
    band = np.abs(d) <= ct.reach
    h = np.zeros(kk.shape)
    h[band] = entries(model, ct, level, kk[band], d[band], part)
    return h


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray
    layout: BasisLayout
    representation: str  # "single-level" | "multilevel"
    model: ModelSystem = field(repr=False)
    table: ConnectionTable = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def assemble_single_level(model: ModelSystem, layout: BasisLayout, ct: ConnectionTable,
                          part: str = "full") -> HamiltonianMatrix:
    """Level-M scaling-basis matrix on the layout's fine window."""
    if ct.reach != layout.support - 1:
        raise LayoutError("connection table does not match layout support")
    lo, hi = layout.fine
    mat = dense_single_level(model, ct, layout.top_level, lo, hi, part)
    return HamiltonianMatrix(mat, layout, "single-level", model, ct)


def to_multilevel(h: HamiltonianMatrix, layout: BasisLayout | None = None) -> HamiltonianMatrix:
    layout = layout or h.layout
    if h.representation != "single-level":
        raise LayoutError("expected a single-level matrix")
    if h.dim != layout.fine_dim or layout is not h.layout and layout != h.layout:
        raise LayoutError("matrix does not match layout")
    s = layout.synthesis_matrix
    hm = s.T @ (h.matrix @ s)
    hm = 0.5 * (hm + hm.T)
    return HamiltonianMatrix(hm, layout, "multilevel", h.model, h.table)


def assemble(model: ModelSystem, layout: BasisLayout, ct: ConnectionTable) -> HamiltonianMatrix:
    return to_multilevel(assemble_single_level(model, layout, ct))


# --- contractions with functions outside the basis ----------------------------------


def refine_to(c: np.ndarray, lo: int, h: np.ndarray, steps: int) -> tuple[np.ndarray, int]:
    for _ in range(steps):
        c = upsample(c, h)
        lo = 2 * lo
    return c, lo


def basis_function_coeffs(fb: FilterBank, kind: str, level: int, k: int, target: int) -> tuple[np.ndarray, int]:
    """Level-``target`` scaling coefficients of s_{level,k} or w_{level,k}."""
    if kind == "s":
        if target < level:
            raise ValueError("target level below the function's level")
        return refine_to(np.array([1.0]), k, fb.h, target - level)
    if kind == "w":
        if target < level + 1:
            raise ValueError("wavelets need target >= level + 1")
        return refine_to(np.asarray(fb.g, dtype=float), 2 * k, fb.h, target - level - 1)
    raise ValueError(f"kind must be 's' or 'w', got {kind!r}")


def operator_row(model: ModelSystem, fb: FilterBank, ct: ConnectionTable, bra: tuple[str, int, int],
                 ket: np.ndarray, layout: BasisLayout) -> float:
    """<chi_bra| H |Psi> with Psi given by multilevel coefficients on ``layout``."""
    kind, m, k = bra
    psi = synthesis(ket, layout, fb)
    lo = layout.fine[0]
    return contract(model, fb, ct, bra, psi, lo, layout.top_level)


def contract(model: ModelSystem, fb: FilterBank, ct: ConnectionTable, bra: tuple[str, int, int],
             psi: np.ndarray, lo: int, level: int, part: str = "full") -> float:
    """<chi_bra| H |psi>, psi a level-``level`` scaling expansion indexed from ``lo``."""
    kind, m, k = bra
    top = max(level, m if kind == "s" else m + 1)
    b, blo = basis_function_coeffs(fb, kind, m, k, top)
    p, plo = refine_to(psi, lo, fb.h, top - level)
    r = ct.reach
    if blo + len(b) - 1 < plo - r or blo > plo + len(p) - 1 + r:
        return 0.0
    hp, hlo = apply_single_level(model, ct, top, p, plo, part)
    a, z = max(blo, hlo), min(blo + len(b), hlo + len(hp))
    if z <= a:
        return 0.0
    return float(b[a - blo:z - blo] @ hp[a - hlo:z - hlo])


def matrix_element(model: ModelSystem, fb: FilterBank, ct: ConnectionTable, bra: tuple[str, int, int],
                   ket: tuple[str, int, int], part: str = "full") -> float:
    """<chi_bra| H |chi_ket> for two basis functions given as (kind, level, k)."""
    kind, m, k = ket
    level = m if kind == "s" else m + 1
    c, lo = basis_function_coeffs(fb, kind, m, k, level)
    return contract(model, fb, ct, bra, c, lo, level, part)


def wavelet_terms(model: ModelSystem, fb: FilterBank, ct: ConnectionTable, psi: np.ndarray, lo: int,
                  level: int, wlevel: int, kmin: int, kmax: int, part: str = "full"):
    """W_k = <w|H|w> and R_k = <w|H|psi> for w = w_{wlevel,k}, k in [kmin, kmax].

    ``psi`` is a level-``level`` scaling expansion with ``level <= wlevel``.
    Also returns <w|psi> for the orthogonality check.
    """
    if level > wlevel:
        raise ValueError("psi must live below the wavelet level")
    top = wlevel + 1
    p, plo = refine_to(psi, lo, fb.h, top - level)
    hp, hlo = apply_single_level(model, ct, top, p, plo, part)
    r_k = downsample(hp, hlo, fb.g, kmin, kmax)
    overlap = downsample(p, plo, fb.g, kmin, kmax)
    ks = np.arange(kmin, kmax + 1)
    g = fb.g
    w_k = np.zeros(len(ks))
    for i, gi in enumerate(g):
        for j, gj in enumerate(g):
            if abs(j - i) <= ct.reach:
                w_k += gi * gj * entries(model, ct, top, 2 * ks + i, j - i, part)
    return w_k, r_k, overlap
