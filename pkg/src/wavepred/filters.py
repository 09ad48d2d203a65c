"""Daubechies extremal-phase filter banks.

Coefficients are read from versioned text files shipped in ``wavepred/data``
(one per genus).  The files are produced by :func:`generate_filter`, which
performs the spectral factorisation in extended precision with mpmath; at
runtime only the cached digits are used.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

MAX_GENUS = 10
DATA_DIR = Path(__file__).parent / "data"
CACHE_HEADER = "dbfilter v1 genus={}"


class UnsupportedFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class FilterBank:
    genus: int
    h: np.ndarray
    g: np.ndarray

    @property
    def support(self) -> int:
        """Support length N_s of the scaling function (filter length - 1)."""
        return len(self.h) - 1

    def __hash__(self):
        return hash((self.genus, self.h.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, FilterBank) and self.genus == other.genus
                and np.array_equal(self.h, other.h))


def highpass_from_lowpass(h: np.ndarray) -> np.ndarray:
    n = len(h) - 1
    return np.array([(-1) ** i * h[n - i] for i in range(n + 1)])


def generate_filter(genus: int, dps: int = 60) -> list:
    """Minimum-phase Daubechies lowpass filter as mpmath numbers.

    Roots of the half-band polynomial inside the unit circle are kept, which
    reproduces the classic tables (h_0 = 0.2303... for genus 4).
    """
    import mpmath as mp

    if not 1 <= genus <= MAX_GENUS:
        raise UnsupportedFamilyError(f"genus must be in 1..{MAX_GENUS}, got {genus}")
    p = genus
    with mp.workdps(dps):
        # z^{p-1} P((2 - z - 1/z)/4), P(y) = sum_k C(p-1+k, k) y^k
        laurent = {0: mp.mpf(1)}
        step = {0: mp.mpf(1) / 2, 1: -mp.mpf(1) / 4, -1: -mp.mpf(1) / 4}
        poly = {}
        for k in range(p):
            coef = mp.binomial(p - 1 + k, k)
            for e, c in laurent.items():
                poly[e] = poly.get(e, 0) + coef * c
            nxt = {}
            for e1, c1 in laurent.items():
                for e2, c2 in step.items():
                    nxt[e1 + e2] = nxt.get(e1 + e2, 0) + c1 * c2
            laurent = nxt
        desc = [poly.get(e, mp.mpf(0)) for e in range(p - 1, -p, -1)]
        roots = [] if p == 1 else mp.polyroots(desc, maxsteps=500, extraprec=4 * dps)
        q = [mp.mpc(1)]
        for r in (r for r in roots if abs(r) < 1):
            q = [a - r * b for a, b in zip(q + [0], [0] + q)]
        for _ in range(p):
            q = [a + b for a, b in zip(q + [0], [0] + q)]
        h = [mp.re(c) for c in q]
        total = mp.fsum(h)
        return [c * mp.sqrt(2) / total for c in h]


def format_filter(genus: int, coeffs) -> str:
    import mpmath as mp

    lines = [CACHE_HEADER.format(genus)]
    lines += [mp.nstr(mp.mpf(c), 17, strip_zeros=False, min_fixed=1, max_fixed=0)
              for c in coeffs]
    return "\n".join(lines) + "\n"


def parse_filter(text: str) -> tuple[int, np.ndarray]:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "dbfilter" or head[1] != "v1" or not head[2].startswith("genus="):
        raise ValueError(f"not a dbfilter v1 file: {lines[0]!r}")
    genus = int(head[2].split("=", 1)[1])
    h = np.array([float(x) for x in lines[1:]])
    if len(h) != 2 * genus:
        raise ValueError(f"expected {2 * genus} coefficients for genus {genus}, got {len(h)}")
    return genus, h


def cache_path(genus: int, directory: Path | None = None) -> Path:
    return (directory or DATA_DIR) / f"dbfilter_p{genus:02d}.txt"


def write_cache(genus: int, directory: Path | None = None) -> Path:
    path = cache_path(genus, directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(format_filter(genus, generate_filter(genus)))
    tmp.replace(path)
    return path


@lru_cache(maxsize=None)
def build_filter(genus: int) -> FilterBank:
    """Filter bank of the genus-``genus`` Daubechies family (2*genus taps)."""
    if not isinstance(genus, (int, np.integer)) or not 1 <= genus <= MAX_GENUS:
        raise UnsupportedFamilyError(f"genus must be an integer in 1..{MAX_GENUS}, got {genus!r}")
    path = cache_path(genus)
    if path.exists():
        _, h = parse_filter(path.read_text())
    else:
        h = np.array([float(c) for c in generate_filter(genus)])
    h.setflags(write=False)
    g = highpass_from_lowpass(h)
    g.setflags(write=False)
    return FilterBank(int(genus), h, g)
