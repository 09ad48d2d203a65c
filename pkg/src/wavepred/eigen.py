"""Dense symmetric eigensolves of the level-M Hamiltonian."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import BasisLayout, make_layout, synthesis
from .filters import FilterBank, build_filter
from .operators import HamiltonianMatrix, ModelSystem, assemble, connection_table, refine_to

FORMAT = "wavepred-solution"
VERSION = 1
CLUSTER_GAP = 1e-8


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralSolution:
    level: int
    layout: BasisLayout
    eigenvalues: np.ndarray
    vectors: np.ndarray  # multilevel coordinates, one column per state
    residuals: np.ndarray
    hamiltonian: HamiltonianMatrix | None = field(default=None, repr=False)

    @property
    def n_states(self) -> int:
        return len(self.eigenvalues)

    def fine_vector(self, state: int, fb: FilterBank | None = None) -> np.ndarray:
        """Level-M scaling coefficients of a state on ``layout.fine``."""
        return synthesis(self.vectors[:, state], self.layout, fb)

    def to_dict(self, genus: int | None = None) -> dict:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "level": self.level,
            "layout": {"support": self.layout.support, "top_level": self.layout.top_level,
                       "halfwidth": self.layout.halfwidth, "dim": self.layout.dim},
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "vectors": self.vectors.T.tolist(),
        }
        if self.hamiltonian is not None:
            doc["model"] = self.hamiltonian.model.to_dict()
        doc["genus"] = genus if genus is not None else (self.layout.support + 1) // 2
        return doc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralSolution":
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise ValueError("not a wavepred-solution v1 document")
        fb = build_filter(int(doc["genus"]))
        lay = doc["layout"]
        layout = make_layout(fb, int(lay["top_level"]), float(lay["halfwidth"]))
        ham = None
        if "model" in doc:
            model = ModelSystem.from_dict(doc["model"])
            ham = assemble(model, layout, connection_table(fb)) if fb.genus >= 3 else None
        vecs = np.array(doc["vectors"], dtype=float).T
        return cls(int(doc["level"]), layout, np.array(doc["eigenvalues"]), vecs,
                   np.array(doc["residuals"]), ham)

    @classmethod
    def from_json(cls, text: str) -> "SpectralSolution":
        return cls.from_dict(json.loads(text))


def _orthonormalize_clusters(evals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    start = 0
    n = len(evals)
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] < CLUSTER_GAP:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(vecs[:, start:stop])
            vecs[:, start:stop] = q
        start = stop
    return vecs


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # deterministic phase: the largest-magnitude component is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def solve(h: HamiltonianMatrix | np.ndarray, n_states: int | None = None) -> SpectralSolution:
    """Lowest ``n_states`` eigenpairs, ascending."""
    ham = h if isinstance(h, HamiltonianMatrix) else None
    a = np.asarray(h.matrix if ham is not None else h, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise SymmetryError("matrix must be square")
    n_states = n if n_states is None else n_states
    if not 1 <= n_states <= n:
        raise ValueError(f"n_states must be in 1..{n}")
    scale = np.max(np.abs(a)) or 1.0
    if np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise SymmetryError("matrix is not symmetric")
    evals, vecs = scipy.linalg.eigh(a)
    vecs = _orthonormalize_clusters(evals, vecs)[:, :n_states]
    vecs = _fix_signs(vecs)
    evals = evals[:n_states]
    res = np.linalg.norm(a @ vecs - vecs * evals, axis=0)
    layout = ham.layout if ham is not None else None
    level = layout.top_level if layout is not None else 0
    return SpectralSolution(level, layout, evals, vecs, res, ham)


def rayleigh_quotient(h: HamiltonianMatrix | np.ndarray, v: np.ndarray) -> float:
    a = h.matrix if isinstance(h, HamiltonianMatrix) else np.asarray(h)
    v = np.asarray(v, dtype=float)
    nrm = v @ v
    if nrm == 0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(v @ a @ v / nrm)


def solve_model(model: ModelSystem, fb: FilterBank, level: int, halfwidth: float = 8.0,
                n_states: int = 6) -> SpectralSolution:
    layout = make_layout(fb, level, halfwidth)
    ham = assemble(model, layout, connection_table(fb))
    return solve(ham, n_states)


def prolong(solution: SpectralSolution, state: int, target: int, fb: FilterBank) -> tuple[np.ndarray, int]:
    """Level-``target`` scaling coefficients of a state (exact refinement)."""
    if target < solution.level:
        raise ValueError("cannot prolong to a coarser level")
    c = solution.fine_vector(state, fb)
    return refine_to(c, solution.layout.fine[0], fb.h, target - solution.level)


def align(a: np.ndarray, alo: int, b: np.ndarray, blo: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Zero-pad two index-offset coefficient vectors onto a common range."""
    lo = min(alo, blo)
    hi = max(alo + len(a), blo + len(b))
    out_a = np.zeros(hi - lo)
    out_b = np.zeros(hi - lo)
    out_a[alo - lo:alo - lo + len(a)] = a
    out_b[blo - lo:blo - lo + len(b)] = b
    return out_a, out_b, lo


def track_states(reference: SpectralSolution, solution: SpectralSolution, fb: FilterBank) -> np.ndarray:
    """For each reference state, the index in ``solution`` of maximal overlap."""
    top = max(reference.level, solution.level)
    ref = [prolong(reference, i, top, fb) for i in range(reference.n_states)]
    new = [prolong(solution, j, top, fb) for j in range(solution.n_states)]
    ov = np.zeros((len(ref), len(new)))
    for i, (a, alo) in enumerate(ref):
        for j, (b, blo) in enumerate(new):
            x, y, _ = align(a, alo, b, blo)
            ov[i, j] = abs(x @ y)
    return np.argmax(ov, axis=1)
