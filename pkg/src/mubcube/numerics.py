"""Dense complex matrices, tolerance policy and elementary predicates.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the helpers here
validate shape and finiteness and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MubCubeError, NonFiniteEntries, NotRankOneProjection


@dataclass(frozen=True)
class Tolerance:
    """Two-tier tolerance: analytically built objects vs optimizer outputs."""

    exact_tol: float = 1e-9
    search_tol: float = 1e-6

    def __post_init__(self):
        if not (0 < self.exact_tol <= self.search_tol < 1):
            raise ValueError("need 0 < exact_tol <= search_tol < 1")


DEFAULT_TOL = Tolerance()
EXACT_TOL = DEFAULT_TOL.exact_tol
SEARCH_TOL = DEFAULT_TOL.search_tol


def as_complex_matrix(a, dim: int | None = None) -> np.ndarray:
    """Return ``a`` as a square complex128 array, checking shape and finiteness."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntries("matrix has NaN or infinite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(A* B)."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(a, b))


def is_unitary(m, tol: float = EXACT_TOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    dev = dagger(m) @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(dev)) <= tol)


def projection_residuals(m) -> dict[str, float]:
    """Sup-norm residuals of the three rank-one projection conditions."""
    m = np.asarray(m, dtype=np.complex128)
    return {
        "hermitian": float(np.max(np.abs(m - dagger(m)))),
        "idempotent": float(np.max(np.abs(m @ m - m))),
        "trace": float(abs(np.trace(m) - 1)),
    }


def is_rank_one_projection(m, tol: float = EXACT_TOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return all(r <= tol for r in projection_residuals(m).values())


def normalize_phase(v: np.ndarray, tol: float = EXACT_TOL) -> np.ndarray:
    """Rotate ``v`` so that its first entry of (numerically) largest modulus is real positive."""
    mod = np.abs(v)
    # ties within tolerance resolve to the lowest index, so noise cannot flip the choice
    pivot = int(np.flatnonzero(mod >= mod.max() - max(10 * tol, 1e-12))[0])
    return v * (np.conj(v[pivot]) / mod[pivot])


def principal_unit_eigenvector(p, tol: float = EXACT_TOL) -> np.ndarray:
    """Unit vector ``v`` with ``P ~ |v><v|`` for a rank-one projection ``P``.

    The eigenvalue closest to 1 of the Hermitian part is used; its eigenvector
    is phase-normalized with :func:`normalize_phase`.
    """
    p = as_complex_matrix(p)
    herm = (p + dagger(p)) / 2
    w, vecs = np.linalg.eigh(herm)
    i = int(np.argmax(w))
    if abs(w[i] - 1) > tol:
        raise NotRankOneProjection(f"largest eigenvalue {w[i]:.12g} is not within {tol:g} of 1")
    return normalize_phase(vecs[:, i], tol)


def outer(v: np.ndarray) -> np.ndarray:
    return np.outer(v, np.conj(v))


def matrix_to_json(m) -> dict:
    m = as_complex_matrix(m)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    except KeyError as exc:
        raise MubCubeError(f"matrix JSON is missing field {exc}") from None
    m = as_complex_matrix(m)
    if "dim" in obj and int(obj["dim"]) != m.shape[0]:
        raise DimensionMismatch(f"declared dim {obj['dim']} but entries are {m.shape[0]}x{m.shape[0]}")
    return m


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_phases(shape, rng: np.random.Generator) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(shape))
