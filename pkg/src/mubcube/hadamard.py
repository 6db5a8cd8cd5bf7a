"""Complex Hadamard matrices: validation, dephasing, Haagerup invariants, equivalence.

Two Hadamard matrices are equivalent when ``H1 = P1 D1 H2 D2 P2`` for
permutation matrices ``P1, P2`` and unimodular diagonals ``D1, D2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import DimensionMismatch, DimensionTooLarge, NotOrthogonal, NotUnimodular
from .numerics import EXACT_TOL, as_complex_matrix, dagger, matrix_from_json, matrix_to_json

MAX_EQUIV_DIM = 6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HadamardMatrix:
    entries: np.ndarray
    tol: float = EXACT_TOL

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> "HadamardMatrix":
        return HadamardMatrix(self.entries.T, self.tol)

    def adjoint(self) -> "HadamardMatrix":
        return HadamardMatrix(dagger(self.entries), self.tol)

    def to_json(self) -> dict:
        return {**matrix_to_json(self.entries), "kind": "hadamard", "tol": self.tol}

    @classmethod
    def from_json(cls, obj: dict) -> "HadamardMatrix":
        return validate_hadamard(matrix_from_json(obj), obj.get("tol", EXACT_TOL))


def _entries(h) -> np.ndarray:
    if isinstance(h, HadamardMatrix):
        return h.entries
    return as_complex_matrix(h)


def hadamard_residuals(m) -> dict:
    """Worst unimodularity and orthogonality defects, with the offending indices."""
    m = _entries(m)
    d = m.shape[0]
    mod_dev = np.abs(np.abs(m) - 1)
    iu = np.unravel_index(np.argmax(mod_dev), m.shape)
    off = ~np.eye(d, dtype=bool)
    out = {"unimodular": (float(mod_dev[iu]), tuple(int(i) for i in iu))}
    for kind, gram in (("columns", dagger(m) @ m), ("rows", m @ dagger(m))):
        g = np.where(off, np.abs(gram), 0.0)
        jk = np.unravel_index(np.argmax(g), g.shape)
        out[kind] = (float(g[jk]), tuple(int(i) for i in jk))
    return out


def validate_hadamard(m, tol: float = EXACT_TOL) -> HadamardMatrix:
    """Wrap ``m`` as a :class:`HadamardMatrix` or raise with the offending indices.

    Entries must be unimodular within ``tol``; distinct columns (and rows) must
    have inner product of modulus at most ``d * tol``.
    """
    m = _entries(m)
    d = m.shape[0]
    res = hadamard_residuals(m)
    dev, idx = res["unimodular"]
    if dev > tol:
        raise NotUnimodular(idx, dev)
    for kind in ("columns", "rows"):
        overlap, (j, k) = res[kind]
        if overlap > d * tol:
            raise NotOrthogonal(j, k, overlap, kind)
    return HadamardMatrix(m, tol)


def is_hadamard(m, tol: float = EXACT_TOL) -> bool:
    try:
        validate_hadamard(m, tol)
    except (NotUnimodular, NotOrthogonal):
        return False
    return True


def haagerup(h) -> np.ndarray:
    """Haagerup tensor ``g[j,k,l,r] = h[j,k] conj(h[l,k]) h[l,r] conj(h[j,r])``.

    For the transition matrix of an MUB pair this equals
    ``d**2 * Tr(P_j Q_k P_l Q_r)``.
    """
    h = _entries(h)
    hc = np.conj(h)
    return np.einsum("jk,lk,lr,jr->jklr", h, hc, h, hc)


def dephase_factors(h, row: int = 0, col: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals ``(r, c)`` with ``diag(r) @ H @ diag(c)`` dephased at ``(row, col)``."""
    h = _entries(h)
    c = 1 / h[row, :]
    r = 1 / (h[:, col] * c[col])
    return r, c


def dephase(h, row: int = 0, col: int = 0):
    """Scale rows and columns so that ``row`` and ``col`` become all ones.

    Columns are divided by their entry in ``row`` first, then rows by their
    (updated) entry in ``col``. Returns the same type as the input.
    """
    m = _entries(h)
    d = m.shape[0]
    if not (0 <= row < d and 0 <= col < d):
        raise IndexError(f"dephasing index ({row}, {col}) out of range for dimension {d}")
    r, c = dephase_factors(m, row, col)
    out = r[:, None] * m * c[None, :]
    if isinstance(h, HadamardMatrix):
        return HadamardMatrix(out, h.tol)
    return out


def permutation_matrix(perm) -> np.ndarray:
    """Matrix ``P`` with ``(P @ A)[i] == A[perm[i]]``."""
    d = len(perm)
    p = np.zeros((d, d))
    p[np.arange(d), np.asarray(perm)] = 1
    return p


@dataclass(frozen=True)
class EquivalenceWitness:
    """``H1 = P1 @ diag(d1) @ H2' @ diag(d2) @ P2`` where ``H2'`` is H2 or its adjoint.

    ``row_perm`` and ``col_perm`` describe ``P1 @ X @ P2 == X[row_perm][:, col_perm]``.
    """

    row_perm: tuple
    col_perm: tuple
    d1: np.ndarray
    d2: np.ndarray
    residual: float
    branch: str = field(default="direct")

    @property
    def P1(self) -> np.ndarray:
        return permutation_matrix(self.row_perm)

    @property
    def P2(self) -> np.ndarray:
        return permutation_matrix(self.col_perm).T

    @property
    def D1(self) -> np.ndarray:
        return np.diag(self.d1)

    @property
    def D2(self) -> np.ndarray:
        return np.diag(self.d2)

    def apply(self, h2) -> np.ndarray:
        m = _entries(h2)
        if self.branch == "adjoint":
            m = dagger(m)
        return self.P1 @ self.D1 @ m @ self.D2 @ self.P2

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "row_perm": list(self.row_perm),
            "col_perm": list(self.col_perm),
            "d1": {"re": self.d1.real.tolist(), "im": self.d1.imag.tolist()},
            "d2": {"re": self.d2.real.tolist(), "im": self.d2.imag.tolist()},
            "residual": self.residual,
        }


def _check_equiv_dims(m1: np.ndarray, m2: np.ndarray) -> int:
    if m1.shape != m2.shape:
        raise DimensionMismatch(f"dimensions {m1.shape[0]} and {m2.shape[0]} differ")
    d = m1.shape[0]
    if d > MAX_EQUIV_DIM:
        raise DimensionTooLarge(f"exhaustive equivalence search supports d <= {MAX_EQUIV_DIM}, got {d}")
    return d


def _match_rows(target: np.ndarray, cand: np.ndarray, tol: float):
    """Row matching of ``target`` (d, d) against candidates ``cand`` (d, T, d).

    Returns ``(t, sigma)`` for the first column arrangement ``t`` whose rows are a
    permutation of the target rows within ``tol``, else ``None``.
    """
    d = target.shape[0]
    dist = np.max(np.abs(target[:, None, None, :] - cand[None, :, :, :]), axis=-1)  # (i, r, t)
    best = np.argmin(dist, axis=1)  # (i, t)
    best_dist = np.take_along_axis(dist, best[:, None, :], axis=1)[:, 0, :]
    ok = np.all(best_dist <= tol, axis=0)
    ok &= np.all(np.sort(best, axis=0) == np.arange(d)[:, None], axis=0)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    t = int(hits[0])
    return t, best[:, t]


def equivalent(h1, h2, tol: float = EXACT_TOL) -> EquivalenceWitness | None:
    """Exhaustive test of Hadamard equivalence for ``d <= 6``.

    Every row and column permutation of H2 is covered: permutations are grouped
    by the pivot ``(sigma[0], tau[0])`` that lands in position (0, 0), H2 is
    dephased once per pivot, all column arrangements with that pivot are compared
    at once, and rows are matched against the dephased H1 (rows of a Hadamard
    matrix are distinct, so the matching is unique when it exists).
    """
    m1, m2 = _entries(h1), _entries(h2)
    d = _check_equiv_dims(m1, m2)
    r1, c1 = dephase_factors(m1)
    n1 = r1[:, None] * m1 * c1[None, :]
    rest = list(permutations(range(1, d)))
    for b in range(d):
        others = [c for c in range(d) if c != b]
        taus = np.array([(b,) + tuple(others[i - 1] for i in p) for p in rest], dtype=int)
        for a in range(d):
            r2, c2 = dephase_factors(m2, a, b)
            n2 = r2[:, None] * m2 * c2[None, :]
            found = _match_rows(n1, n2[:, taus], tol)
            if found is None:
                continue
            t, sigma = found
            tau = taus[t]
            # diag(1/r1) diag(r2[sigma]) H2[sigma][:, tau] diag(c2[tau]) diag(1/c1) == H1
            u = r2[sigma] / r1
            v = c2[tau] / c1
            d1 = np.empty(d, dtype=complex)
            d2 = np.empty(d, dtype=complex)
            d1[sigma] = u
            d2[tau] = v
            w = EquivalenceWitness(tuple(int(s) for s in sigma), tuple(int(s) for s in tau), d1, d2, 0.0)
            residual = float(np.max(np.abs(w.apply(m2) - m1)))
            if residual <= tol:
                return EquivalenceWitness(w.row_perm, w.col_perm, d1, d2, residual)
    return None


def adjoint_equivalent(h1, h2, tol: float = EXACT_TOL) -> EquivalenceWitness | None:
    """Equivalence of H1 to H2 or to H2*; ``witness.branch`` says which matched."""
    w = equivalent(h1, h2, tol)
    if w is not None:
        return w
    m2 = _entries(h2)
    w = equivalent(h1, dagger(m2), tol)
    if w is None:
        return None
    return EquivalenceWitness(w.row_perm, w.col_perm, w.d1, w.d2, w.residual, branch="adjoint")
