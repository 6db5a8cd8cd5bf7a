"""Hadamard cubes of MUB-triplets.

Index order is ``(j, k, l)`` for the bases ``(X, Y, Z)``. Axes are numbered
0, 1, 2 and the "bottom face" is the slice ``C[:, :, d - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionNotSix,
    MubCubeError,
    ProjectionDefect,
    ReconstructionMismatch,
    WeakConditionsFailed,
    ZeroEntry,
)
from .mub import MubSystem, validate_mub
from .numerics import EXACT_TOL, SEARCH_TOL, dagger, principal_unit_eigenvector, projection_residuals


@dataclass(frozen=True)
class HadamardCube:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.complex128)
        if e.ndim != 3 or not (e.shape[0] == e.shape[1] == e.shape[2]) or e.shape[0] == 0:
            raise DimensionMismatch(f"cube must be d x d x d, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise MubCubeError("cube has non-finite entries")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def slice(self, axis: int, index: int) -> np.ndarray:
        return slice_cube(self, axis, index)

    def to_json(self) -> dict:
        return {"dim": self.dim, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "HadamardCube":
        cube = cls(np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float))
        if "dim" in obj and int(obj["dim"]) != cube.dim:
            raise DimensionMismatch(f"declared dim {obj['dim']} but entries have size {cube.dim}")
        return cube


def _entries(c) -> np.ndarray:
    return c.entries if isinstance(c, HadamardCube) else HadamardCube(c).entries


def cube_from_hadamards(h1, h2, h3) -> HadamardCube:
    """``C[j,k,l] = h1[j,k] * h2[k,l] * h3[l,j]`` for any three square matrices."""
    h1, h2, h3 = (np.asarray(getattr(h, "entries", h), dtype=np.complex128) for h in (h1, h2, h3))
    return HadamardCube(np.einsum("jk,kl,lj->jkl", h1, h2, h3))


def build_cube(t: MubSystem) -> HadamardCube:
    """Hadamard cube ``C[j,k,l] = d**1.5 <e_j,f_k><f_k,g_l><g_l,e_j>`` of a triplet."""
    if len(t) != 3:
        raise MubCubeError(f"build_cube needs a triplet, got {len(t)} bases")
    x, y, z = t.bases
    d = t.dim
    s = np.sqrt(d)
    return cube_from_hadamards(s * dagger(x) @ y, s * dagger(y) @ z, s * dagger(z) @ x)


def slice_cube(c, axis: int, index: int) -> np.ndarray:
    """2-D cross-section. Axis 0: rows k, cols l; axis 1: rows j, cols l; axis 2: rows j, cols k."""
    e = _entries(c)
    d = e.shape[0]
    if axis not in (0, 1, 2):
        raise IndexError(f"axis must be 0, 1 or 2, got {axis}")
    if not 0 <= index < d:
        raise IndexError(f"slice index {index} out of range for dimension {d}")
    return np.take(e, index, axis=axis).copy()


def _all_slices(e: np.ndarray) -> np.ndarray:
    """All 3d slices stacked as (axis, index, row, col)."""
    return np.stack([e, e.transpose(1, 0, 2), e.transpose(2, 0, 1)])


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    residual: float
    threshold: float
    witness: tuple | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "residual": self.residual,
            "threshold": self.threshold,
            "witness": None if self.witness is None else list(self.witness),
        }


@dataclass(frozen=True)
class Classification:
    label: str  # "generic", "exceptional" or "other"
    n_values: int
    n_conjugate_pairs: int
    n_self_conjugate: int
    root_deviation: float
    cluster_tol: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CubeReport:
    checks: dict = field(default_factory=dict)
    classification: Classification | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_json(self) -> dict:
        out = {"passed": self.passed, "checks": {k: v.to_json() for k, v in self.checks.items()}}
        if self.classification is not None:
            out["classification"] = self.classification.to_json()
        return out


def _check(residuals: np.ndarray, threshold: float) -> CheckResult:
    residuals = np.asarray(residuals, dtype=float)
    if residuals.size == 0:
        return CheckResult(True, 0.0, float(threshold))
    idx = np.unravel_index(np.argmax(residuals), residuals.shape)
    worst = float(residuals[idx])
    return CheckResult(bool(worst <= threshold), worst, float(threshold), tuple(int(i) for i in idx))


def _merge(*checks: CheckResult) -> CheckResult:
    worst = max(checks, key=lambda c: c.residual - c.threshold)
    return CheckResult(all(c.passed for c in checks), worst.residual, worst.threshold, worst.witness)


def _unimodular_check(e, tol) -> CheckResult:
    return _check(np.abs(np.abs(e) - 1), tol)


def _orthogonality_residuals(s: np.ndarray) -> np.ndarray:
    """Off-diagonal |Gram| for columns and rows of a stack of matrices (..., 2, d, d)."""
    d = s.shape[-1]
    cols = np.abs(np.einsum("...ij,...ik->...jk", np.conj(s), s))
    rows = np.abs(np.einsum("...ji,...ki->...jk", np.conj(s), s))
    off = ~np.eye(d, dtype=bool)
    return np.stack([cols * off, rows * off], axis=-3)


def _piercing_residuals(e: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    """|sum along axis - sqrt(d)|, shaped (axis, a, b)."""
    d = e.shape[0]
    return np.stack([np.abs(e.sum(axis=a) - np.sqrt(d)) for a in axes])


def _phase_equivalence_residuals(e: np.ndarray) -> np.ndarray:
    """Rank-one defect of the ratio matrix for every pair of parallel slices.

    Shape (axis, s, s', k, l): ``|R[k,l] R[0,0] - R[k,0] R[0,l]|`` with ``R = S'/S``.
    """
    s = _all_slices(e)
    r = s[:, None, :, :, :] / s[:, :, None, :, :]
    return np.abs(r * r[..., :1, :1] - r[..., :, :1] * r[..., :1, :])


def haagerup_residual_tensor(c) -> np.ndarray:
    """Haagerup-condition defect for all index pairs, shape (j, j', k, k', l, l')."""
    e = _entries(c)
    a = e[:, None, :, None, :, None]  # C[j, k, l]
    lhs = (
        e[None, :, :, None, :, None]  # C[j', k, l]
        * e[:, None, None, :, :, None]  # C[j, k', l]
        * e[:, None, :, None, None, :]  # C[j, k, l']
        * e[None, :, None, :, None, :]  # C[j', k', l']
    )
    rhs = (
        a
        * e[None, :, None, :, :, None]  # C[j', k', l]
        * e[:, None, None, :, None, :]  # C[j, k', l']
        * e[None, :, :, None, None, :]  # C[j', k, l']
    )
    return np.abs(lhs - rhs)


def haagerup_condition(c, jkl, jkl2, tol: float = EXACT_TOL) -> bool:
    """Checkered sub-cuboid condition: product of 'black' corners equals product of 'white' corners."""
    e = _entries(c)
    j, k, l = jkl
    j2, k2, l2 = jkl2
    lhs = e[j2, k, l] * e[j, k2, l] * e[j, k, l2] * e[j2, k2, l2]
    rhs = e[j, k, l] * e[j2, k2, l] * e[j, k2, l2] * e[j2, k, l2]
    return bool(abs(lhs - rhs) <= tol)


def verify_axioms(c, tol: float = EXACT_TOL) -> CubeReport:
    """Check the four Hadamard-cube axioms and report worst residuals with witnesses.

    Witness layouts: unimodular ``(j, k, l)``; slices_hadamard
    ``(axis, index, cols|rows, a, b)``; parallel_phase_equivalent
    ``(axis, s, s', k, l)``; piercing_sums ``(axis, a, b)``.
    """
    e = _entries(c)
    d = e.shape[0]
    checks = {
        "unimodular": _unimodular_check(e, tol),
        "slices_hadamard": _merge(
            _check(np.abs(np.abs(_all_slices(e)) - 1), tol),
            _check(_orthogonality_residuals(_all_slices(e)), d * tol),
        ),
        "parallel_phase_equivalent": _check(_phase_equivalence_residuals(e), 4 * tol),
        "piercing_sums": _check(_piercing_residuals(e), d * tol),
    }
    return CubeReport(checks)


def verify_weak_conditions(c, tol: float = EXACT_TOL) -> CubeReport:
    """The weaker sufficient set: unimodularity, a Hadamard bottom face with pairwise
    orthogonal horizontal slices, the Haagerup condition, and horizontal piercing sums."""
    e = _entries(c)
    d = e.shape[0]
    bottom = e[:, :, d - 1]
    horizontal = e.transpose(2, 0, 1).reshape(d, d * d)
    gram = np.abs(np.conj(horizontal) @ horizontal.T) * ~np.eye(d, dtype=bool)
    checks = {
        "unimodular": _unimodular_check(e, tol),
        "bottom_face_hadamard": _merge(
            _check(np.abs(np.abs(bottom) - 1), tol),
            _check(_orthogonality_residuals(bottom), d * tol),
        ),
        "horizontal_slices_orthogonal": _check(gram, d * d * tol),
        "haagerup_condition": _check(haagerup_residual_tensor(e), 4 * tol),
        "horizontal_piercing_sums": _check(_piercing_residuals(e, axes=(0, 1)), d * tol),
    }
    return CubeReport(checks)


def verify_inverse_orthogonal(c, tol: float = EXACT_TOL) -> CubeReport:
    """Inverse-orthogonality: every conjugation replaced by a reciprocal.

    Slices need ``sum_j u_j / v_j = 0`` for distinct rows/columns ``u, v``; the
    Haagerup condition and all piercing sums are checked as for Hadamard cubes.
    """
    e = _entries(c)
    d = e.shape[0]
    zero = np.argwhere(e == 0)
    if zero.size:
        raise ZeroEntry(zero[0])
    s = _all_slices(e)
    inv = 1 / s
    cols = np.abs(np.einsum("...ij,...ik->...jk", inv, s))
    rows = np.abs(np.einsum("...ji,...ki->...jk", inv, s))
    off = ~np.eye(d, dtype=bool)
    checks = {
        "inverse_orthogonal_slices": _check(np.stack([cols * off, rows * off], axis=-3), d * tol),
        "haagerup_condition": _check(haagerup_residual_tensor(e), 4 * tol),
        "piercing_sums": _check(_piercing_residuals(e), d * tol),
    }
    return CubeReport(checks)


def reconstruction_projections(c) -> tuple[np.ndarray, np.ndarray]:
    """Second basis ``Y`` (from the bottom face) and the matrices ``R_l``.

    With ``X`` the standard basis, ``f_j = sum_k C[k, j, d-1] e_k / sqrt(d)`` and
    ``R_l = d**-0.5 sum_{j,k} C[j,k,l] Q_k P_j``. Returns ``(Y, R)`` with ``R[l]`` = R_l.
    """
    e = _entries(c)
    d = e.shape[0]
    y = e[:, :, d - 1] / np.sqrt(d)
    # (Q_k P_j)[a, b] = f_k[a] conj(f_k[j]) delta(b, j)
    r = np.einsum("jkl,jk,ak->laj", e, np.conj(y), y) / np.sqrt(d)
    return y, r


def reconstruct_triplet(c, tol: float = EXACT_TOL) -> MubSystem:
    """Rebuild an MUB-triplet ``(I, Y, Z)`` whose Hadamard cube is ``C``.

    Requires the weak conditions; each ``R_l`` must be a rank-one projection
    and its unit eigenvector becomes the l-th vector of ``Z``.
    """
    e = _entries(c)
    d = e.shape[0]
    weak = verify_weak_conditions(e, tol)
    if not weak.passed:
        raise WeakConditionsFailed(weak)
    y, r = reconstruction_projections(e)
    z = np.empty((d, d), dtype=complex)
    for l in range(d):
        residual = max(projection_residuals(r[l]).values())
        if residual > d * tol:
            raise ProjectionDefect(l, residual)
        z[:, l] = principal_unit_eigenvector(r[l], d * tol)
    triplet = validate_mub([np.eye(d), y, z], d * tol)
    mismatch = float(np.max(np.abs(build_cube(triplet).entries - e)))
    if mismatch > d**1.5 * tol:
        raise ReconstructionMismatch(mismatch)
    return triplet


def _cluster(values: np.ndarray, tol: float) -> np.ndarray:
    """Greedy clustering in input order; returns the cluster centers (first members)."""
    centers: list[complex] = []
    for z in values:
        if not centers or np.min(np.abs(np.asarray(centers) - z)) > tol:
            centers.append(complex(z))
    return np.asarray(centers)


ROOTS_24 = np.exp(2j * np.pi * np.arange(24) / 24)


def classify(c, tol: float = SEARCH_TOL) -> Classification:
    """Label a d=6 cube as exceptional, generic or other from its value multiset.

    Exceptional: every entry is a 24th root of unity. Generic: exactly 72
    distinct values forming 36 distinct conjugate pairs.
    """
    e = _entries(c)
    if e.shape[0] != 6:
        raise DimensionNotSix(f"classification is defined for d = 6, got {e.shape[0]}")
    ctol = max(10 * tol, 1e-4)
    flat = e.ravel()
    root_dev = float(np.max(np.min(np.abs(flat[:, None] - ROOTS_24[None, :]), axis=1)))
    centers = _cluster(flat, ctol)
    partner = np.abs(np.conj(centers)[:, None] - centers[None, :]) <= ctol
    self_conj = int(np.sum(np.diag(partner)))
    paired = np.any(partner & ~np.eye(len(centers), dtype=bool), axis=1)
    n_pairs = int(np.sum(paired & ~np.diag(partner))) // 2
    if root_dev <= ctol:
        label = "exceptional"
    elif len(centers) == 72 and n_pairs == 36:
        label = "generic"
    else:
        label = "other"
    return Classification(label, len(centers), n_pairs, self_conj, root_dev, ctol)
