"""Column power-sum invariants and binary-vector machinery for d = 6 Hadamard matrices.

For an integer vector ``gamma`` and a matrix with columns ``h_k``,
``g(gamma) = sum_k prod_j h[j, k] ** gamma[j]`` and ``G(gamma) = |g(gamma)|**2``.
``tilde_G`` symmetrizes ``G`` over all permutations of ``gamma``.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial, prod

import numpy as np

from .errors import DimensionMismatch, DimensionNotSix, MubCubeError, NoPairingFound, OddLength, PreconditionFailed
from .hadamard import dephase
from .numerics import EXACT_TOL, as_complex_matrix, dagger

GAMMA1 = (1, 1, 1, -1, -1, -1)
GAMMA2 = (3, 3, 3, -3, -3, -3)
MAX_EXPONENT = 8


def exponent_vector(gamma, dim: int | None = None) -> tuple:
    g = tuple(int(x) for x in gamma)
    if dim is not None and len(g) != dim:
        raise DimensionMismatch(f"exponent vector has length {len(g)}, expected {dim}")
    if any(abs(x) > MAX_EXPONENT for x in g):
        raise MubCubeError(f"exponents are bounded by {MAX_EXPONENT} in absolute value")
    return g


def _matrix(h) -> np.ndarray:
    return as_complex_matrix(getattr(h, "entries", h))


def column_powers(h, gamma) -> np.ndarray:
    """The vector ``(h_1**gamma, ..., h_d**gamma)``; negative powers use conjugation."""
    m = _matrix(h)
    g = np.asarray(exponent_vector(gamma, m.shape[0]))[:, None]
    pos, neg = np.maximum(g, 0), np.maximum(-g, 0)
    return np.prod(m**pos * np.conj(m) ** neg, axis=0)


def g_of(h, gamma) -> complex:
    return complex(np.sum(column_powers(h, gamma)))


def G_of(h, gamma) -> float:
    return abs(g_of(h, gamma)) ** 2


@lru_cache(maxsize=None)
def _distinct_permutations(gamma: tuple) -> tuple:
    """Distinct rearrangements of ``gamma`` and the stabilizer size of each."""
    stab = prod(factorial(c) for c in Counter(gamma).values())
    return tuple(sorted(set(permutations(gamma)))), stab


def tilde_G(h, gamma) -> float:
    """``sum over all pi in S_6 of G(pi(gamma))``, evaluated over distinct rearrangements."""
    m = _matrix(h)
    if m.shape[0] != 6:
        raise DimensionNotSix(f"tilde_G is defined for d = 6, got {m.shape[0]}")
    perms, stab = _distinct_permutations(exponent_vector(gamma, 6))
    return stab * sum(G_of(m, p) for p in perms)


def tilde_G_full(h, gamma) -> float:
    """Reference evaluation of ``tilde_G`` as the raw 720-term sum."""
    m = _matrix(h)
    if m.shape[0] != 6:
        raise DimensionNotSix(f"tilde_G is defined for d = 6, got {m.shape[0]}")
    g = exponent_vector(gamma, 6)
    return sum(G_of(m, [g[i] for i in p]) for p in permutations(range(6)))


def conjecture_terms(h1, h2, h3) -> dict:
    """Components of the conjectured identity for three transition matrices.

    ``gamma1_terms[j] = tilde_G(H_j, GAMMA1)``; ``gamma2_terms[j]`` holds the two
    factors ``(tilde_G(H_j, GAMMA2), tilde_G(H_j^*, GAMMA2))`` so that a vanishing
    factor is visible.
    """
    ms = [_matrix(h) for h in (h1, h2, h3)]
    if any(m.shape != (6, 6) for m in ms):
        raise DimensionMismatch("conjecture identity needs three 6x6 matrices")
    g1 = [tilde_G(m, GAMMA1) for m in ms]
    g2 = [(tilde_G(m, GAMMA2), tilde_G(dagger(m), GAMMA2)) for m in ms]
    total = sum(g1) + sum(a * b for a, b in g2)
    return {"gamma1_terms": g1, "gamma2_terms": [list(p) for p in g2], "total": total}


def conjecture_identity(h1, h2, h3) -> float:
    """Left-hand side of the conjectured identity (zero for d = 6 MUB-triplets if it holds)."""
    return conjecture_terms(h1, h2, h3)["total"]


def _vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size % 2:
        raise OddLength(f"binary vectors have even length, got {v.size}")
    return v


def is_binary(v, tol: float = EXACT_TOL) -> bool:
    """Greedy antipodal pairing: True iff the entries split into pairs ``(x, -x)``."""
    rest = list(_vector(v))
    thresh = len(rest) * tol
    while rest:
        x = rest.pop(0)
        dist = [abs(x + y) for y in rest]
        j = int(np.argmin(dist))
        if dist[j] > thresh:
            return False
        rest.pop(j)
    return True


def is_binary_power_sum(v, tol: float = EXACT_TOL, unimodular: bool = True) -> bool:
    """Power-sum criterion: all odd power sums vanish (up to ``n`` for unimodular entries)."""
    v = _vector(v)
    n = v.size // 2
    top = n if unimodular else 2 * n - 1
    return all(abs(np.sum(v**k)) <= v.size * tol for k in range(1, top + 1, 2))


def binary_pairing_from_triple_products(x, tol: float = EXACT_TOL) -> tuple:
    """Pair the odd-position entries of a unimodular 6-vector with antipodal even ones.

    Requires ``sum(x) = 0`` and ``x0 x2 x4 + x1 x3 x5 = 0``. Returns three index
    pairs ``((0, p0), (2, p1), (4, p2))`` with ``x[i] + x[p] = 0``.
    """
    x = np.asarray(x, dtype=np.complex128).ravel()
    if x.size != 6:
        raise DimensionMismatch(f"expected a 6-vector, got length {x.size}")
    if abs(np.sum(x)) > tol or abs(x[0] * x[2] * x[4] + x[1] * x[3] * x[5]) > tol:
        raise PreconditionFailed("need sum(x) = 0 and x0 x2 x4 + x1 x3 x5 = 0")
    thresh = 10 * tol
    evens = (1, 3, 5)
    # (x0 + x1)(x0 + x3)(x0 + x5) = 0: try the factors closest to zero first
    for first in sorted(evens, key=lambda e: abs(x[0] + x[e])):
        if abs(x[0] + x[first]) > thresh:
            break
        r1, r2 = (e for e in evens if e != first)
        # x2 cancels r1 or r2; in the corner case x2 + x4 = 0 the proof shows x2 = +-x[r]
        for p2, p4 in ((r1, r2), (r2, r1)):
            if abs(x[2] + x[p2]) <= thresh and abs(x[4] + x[p4]) <= thresh:
                return ((0, first), (2, p2), (4, p4))
    raise NoPairingFound("no antipodal pairing found although the preconditions hold")


def mu_of(subset) -> np.ndarray:
    """Sign vector: -1 on the 3-subset ``subset`` of {0..5}, +1 elsewhere."""
    s = sorted(int(i) for i in subset)
    if len(s) != 3 or len(set(s)) != 3 or not all(0 <= i < 6 for i in s):
        raise MubCubeError(f"expected a 3-element subset of 0..5, got {subset!r}")
    mu = np.ones(6, dtype=int)
    mu[s] = -1
    return mu


ALL_SUBSETS = tuple(combinations(range(6), 3))


def is_I_binary(h, subset, tol: float = EXACT_TOL) -> bool:
    """True iff the column powers ``h_k ** mu(subset)`` form a binary vector."""
    return is_binary(column_powers(h, mu_of(subset)), tol)


def minus_one_rows(h, dephase_row: int = 0, dephase_col: int = 0, tol: float = EXACT_TOL) -> set[int]:
    """Rows (other than ``dephase_row``) of the dephased matrix with an entry near -1."""
    m = _matrix(h)
    if m.shape[0] != 6:
        raise DimensionNotSix(f"expected d = 6, got {m.shape[0]}")
    n = dephase(m, dephase_row, dephase_col)
    near = np.any(np.abs(n + 1) <= tol, axis=1)
    return {int(i) for i in np.flatnonzero(near) if i != dephase_row}
