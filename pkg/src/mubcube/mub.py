"""Systems of mutually unbiased bases and their unitary equivalence.

A basis is stored as a unitary matrix whose columns are the basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MubCubeError, NotEquivalent, NotUnbiased, NotUnitary
from .hadamard import EquivalenceWitness, HadamardMatrix, adjoint_equivalent, validate_hadamard
from .numerics import EXACT_TOL, as_complex_matrix, dagger, matrix_from_json, matrix_to_json


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MubSystem:
    bases: tuple
    tol: float = EXACT_TOL

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(_frozen(b) for b in self.bases))

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    def __len__(self):
        return len(self.bases)

    def __getitem__(self, i) -> np.ndarray:
        return self.bases[i]

    def rotated(self, u) -> "MubSystem":
        """The system ``(U X_1, ..., U X_m)``."""
        u = as_complex_matrix(u, self.dim)
        return MubSystem(tuple(u @ b for b in self.bases), self.tol)

    def transitions(self) -> list[HadamardMatrix]:
        """Cyclic transition matrices ``H_{X1,X2}, H_{X2,X3}, ..., H_{Xm,X1}``."""
        m = len(self.bases)
        return [transition(self.bases[i], self.bases[(i + 1) % m], self.tol) for i in range(m)]

    def to_json(self) -> dict:
        return {"dim": self.dim, "bases": [matrix_to_json(b) for b in self.bases], "tol": self.tol}

    @classmethod
    def from_json(cls, obj: dict, tol: float | None = None) -> "MubSystem":
        bases = [matrix_from_json(b) for b in obj["bases"]]
        return validate_mub(bases, obj.get("tol", EXACT_TOL) if tol is None else tol)


def unbiasedness_residual(x, y) -> float:
    d = x.shape[0]
    return float(np.max(np.abs(np.abs(dagger(x) @ y) - 1 / np.sqrt(d))))


def mub_residuals(bases) -> dict:
    """Per-basis unitarity and per-pair unbiasedness defects (sup norm)."""
    bases = [as_complex_matrix(b) for b in bases]
    d = bases[0].shape[0]
    unitarity = [float(np.max(np.abs(dagger(b) @ b - np.eye(d)))) for b in bases]
    pairs = {
        (i, j): unbiasedness_residual(bases[i], bases[j])
        for i in range(len(bases))
        for j in range(i + 1, len(bases))
    }
    return {"unitarity": unitarity, "unbiasedness": pairs}


def validate_mub(bases, tol: float = EXACT_TOL) -> MubSystem:
    bases = [as_complex_matrix(b) for b in bases]
    if not bases:
        raise MubCubeError("need at least one basis")
    d = bases[0].shape[0]
    for b in bases:
        if b.shape != (d, d):
            raise DimensionMismatch("all bases must have the same dimension")
    res = mub_residuals(bases)
    for i, dev in enumerate(res["unitarity"]):
        if dev > tol:
            raise NotUnitary(i, dev)
    for (i, j), dev in res["unbiasedness"].items():
        if dev > tol:
            raise NotUnbiased(i, j, dev)
    return MubSystem(tuple(bases), tol)


def transition(x, y, tol: float = EXACT_TOL) -> HadamardMatrix:
    """Transition matrix ``h[j, k] = sqrt(d) <e_j, f_k>`` of an unbiased pair.

    The Hadamard validation runs at ``sqrt(d) * tol`` since unbiasedness
    defects are scaled by ``sqrt(d)``.
    """
    x, y = as_complex_matrix(x), as_complex_matrix(y)
    if x.shape != y.shape:
        raise DimensionMismatch("bases have different dimensions")
    d = x.shape[0]
    return validate_hadamard(np.sqrt(d) * dagger(x) @ y, np.sqrt(d) * tol)


def _pair(p):
    if isinstance(p, MubSystem):
        if len(p) != 2:
            raise MubCubeError("expected a pair of bases")
        return p.bases
    x, y = p
    return as_complex_matrix(x), as_complex_matrix(y)


def _rephase_pair(x, y):
    """Re-phase so that <f_j, e_1> = <e_k, f_1> = 1/sqrt(d) for all j, k."""
    t = (dagger(y) @ x)[:, 0]
    y = y * (t / np.abs(t))[None, :]
    s = (dagger(x) @ y)[:, 0]
    x = x * (s / np.abs(s))[None, :]
    return x, y


def directly_equivalent_pairs(pair1, pair2, tol: float = EXACT_TOL) -> np.ndarray:
    """Unitary ``U`` mapping pair1 onto pair2 up to per-vector phases.

    Both pairs are re-phased to a normal form whose transition matrices are
    then compared entrywise; ``U`` maps the re-phased first basis of pair1 onto
    that of pair2 and is checked to carry the second bases along as well.
    Raises :class:`NotEquivalent` on mismatch.
    """
    x, y = _pair(pair1)
    v, w = _pair(pair2)
    if x.shape != v.shape:
        raise DimensionMismatch("pairs have different dimensions")
    d = x.shape[0]
    x, y = _rephase_pair(x, y)
    v, w = _rephase_pair(v, w)
    h1 = np.sqrt(d) * dagger(x) @ y
    h2 = np.sqrt(d) * dagger(v) @ w
    mismatch = float(np.max(np.abs(h1 - h2)))
    if mismatch > np.sqrt(d) * tol:
        raise NotEquivalent(f"normalized transition matrices differ by {mismatch:.3g}")
    u = v @ dagger(x)
    defect = float(np.max(np.abs(u @ y - w)))
    if defect > d * tol:
        raise NotEquivalent(f"intertwiner fails on the second basis (defect {defect:.3g})")
    return u


def permutationally_equivalent_pairs(pair1, pair2, tol: float = EXACT_TOL) -> EquivalenceWitness | None:
    """Decide permutational equivalence of two MUB pairs via their transition matrices.

    The pairs are equivalent iff H_{X,Y} is Hadamard-equivalent to H_{V,W} or to its
    adjoint; the matrix-level witness is returned (``None`` if inequivalent).
    """
    x, y = _pair(pair1)
    v, w = _pair(pair2)
    d = x.shape[0]
    return adjoint_equivalent(transition(x, y, tol), transition(v, w, tol), np.sqrt(d) * tol)


def directly_equivalent_triplets(t1: MubSystem, t2: MubSystem, tol: float = EXACT_TOL) -> bool:
    """Two triplets are directly unitary equivalent iff their Hadamard cubes coincide."""
    from .cube import build_cube

    if t1.dim != t2.dim:
        raise DimensionMismatch("triplets have different dimensions")
    c1, c2 = build_cube(t1), build_cube(t2)
    return bool(np.max(np.abs(c1.entries - c2.entries)) <= t1.dim ** 1.5 * tol)
