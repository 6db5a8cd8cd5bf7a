"""Structured complex Hadamard families in dimension 6.

Besides the explicit Fourier families this module decides membership *up to
Hadamard equivalence* in a family given by a monomial template: a matrix whose
entries are ``K[i, j] * prod_p m_p ** E[i, j, p]`` for unimodular parameters
``m``. After dephasing, membership becomes a set of integer relations between
the entry phases, which is checked exhaustively over row and column orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations

import numpy as np

from .errors import DimensionMismatch, MubCubeError
from .hadamard import HadamardMatrix, dephase_factors, equivalent, haagerup, validate_hadamard
from .mub import MubSystem, validate_mub
from .numerics import EXACT_TOL, as_complex_matrix, dagger

OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class FourierParams:
    x: complex = 1.0
    y: complex = 1.0

    def __post_init__(self):
        for name in ("x", "y"):
            v = complex(getattr(self, name))
            if abs(abs(v) - 1) > EXACT_TOL:
                raise MubCubeError(f"Fourier parameter {name}={v} is not unimodular")
            object.__setattr__(self, name, v)

    @classmethod
    def from_turns(cls, tx: float, ty: float) -> "FourierParams":
        return cls(np.exp(2j * np.pi * tx), np.exp(2j * np.pi * ty))


def _params(p, y=None) -> FourierParams:
    if isinstance(p, FourierParams):
        return p
    return FourierParams(p, 1.0 if y is None else y)


def fourier_transposed_matrix(x: complex, y: complex) -> np.ndarray:
    w, w2 = OMEGA, OMEGA**2
    return np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, w2, w, x, w2 * x, w * x],
            [1, w, w2, y, w * y, w2 * y],
            [1, 1, 1, -1, -1, -1],
            [1, w2, w, -x, -w2 * x, -w * x],
            [1, w, w2, -y, -w * y, -w2 * y],
        ],
        dtype=np.complex128,
    )


def fourier_transposed(p, y=None) -> HadamardMatrix:
    """The transposed Fourier family member F^T(x, y)."""
    p = _params(p, y)
    return validate_hadamard(fourier_transposed_matrix(p.x, p.y))


def fourier(p, y=None) -> HadamardMatrix:
    """The Fourier family member F(x, y), the transpose of F^T(x, y)."""
    return fourier_transposed(p, y).T


def circulant(first_row) -> np.ndarray:
    """Circulant matrix whose rows are right shifts of ``first_row``."""
    r = np.asarray(first_row, dtype=np.complex128)
    n = r.size
    return r[(np.arange(n)[None, :] - np.arange(n)[:, None]) % n]


def circulant_defect(b) -> float:
    b = np.asarray(b)
    return float(np.max(np.abs(b - circulant(b[0]))))


@dataclass(frozen=True)
class TwoCirculantBlocks:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def assemble(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def _entries6(h) -> np.ndarray:
    m = as_complex_matrix(getattr(h, "entries", h))
    if m.shape[0] != 6:
        raise DimensionMismatch(f"expected a 6x6 matrix, got {m.shape[0]}x{m.shape[0]}")
    return m


def detect_two_circulant(h, tol: float = EXACT_TOL) -> TwoCirculantBlocks | None:
    """Split into four 3x3 blocks and return them if all are circulant."""
    m = _entries6(h)
    blocks = [m[:3, :3], m[:3, 3:], m[3:, :3], m[3:, 3:]]
    if max(circulant_defect(b) for b in blocks) > tol:
        return None
    return TwoCirculantBlocks(*(b.copy() for b in blocks))


def szollosi_template(a, b, c, d, e, f) -> np.ndarray:
    """``[[circ(a,b,c), circ(d,e,f)], [circ(d,e,f)^*, -circ(a,b,c)^*]]``."""
    top_left = circulant([a, b, c])
    top_right = circulant([d, e, f])
    return np.block([[top_left, top_right], [dagger(top_right), -dagger(top_left)]])


def detect_szollosi_form(h, tol: float = EXACT_TOL) -> bool:
    """True iff ``h`` has the Szöllősi 2-circulant pattern in its given index order."""
    m = _entries6(h)
    return bool(np.max(np.abs(m - szollosi_template(*m[0]))) <= tol)


def exceptional_reference_matrix() -> np.ndarray:
    a = circulant([OMEGA, 1, 1])
    return np.block([[a, a], [a, -a]])


def exceptional_reference(tol: float = EXACT_TOL) -> HadamardMatrix:
    """The 2-circulant matrix with A = B = C = circ(w, 1, 1), D = -A.

    It is checked to be Hadamard and equivalent to F(1, 1).
    """
    h = validate_hadamard(exceptional_reference_matrix(), tol)
    if equivalent(h, fourier(1, 1), tol) is None:
        raise MubCubeError("exceptional reference is not equivalent to F(1, 1)")
    return h


@dataclass(frozen=True)
class TemplateMatch:
    family: str
    row_perm: tuple
    col_perm: tuple
    residual: float


class MonomialTemplate:
    """A matrix family ``K * m**E`` with free unimodular parameters ``m``.

    ``constants`` is (d, d) complex, ``exponents`` is (d, d, p) integer.
    """

    def __init__(self, name: str, constants, exponents):
        self.name = name
        self.constants = np.asarray(constants, dtype=np.complex128)
        self.exponents = np.asarray(exponents, dtype=int)

    def instance(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=np.complex128)
        return self.constants * np.prod(params ** self.exponents, axis=-1)

    def transposed(self, name: str) -> "MonomialTemplate":
        return MonomialTemplate(name, self.constants.T, self.exponents.transpose(1, 0, 2))

    @cached_property
    def _dephased(self):
        k, e = self.constants, self.exponents
        kd = k * k[0, 0] / (k[:, :1] * k[:1, :])
        ed = e + e[0, 0] - e[:, :1] - e[:1, :]
        return kd[1:, 1:].ravel(), ed[1:, 1:].reshape(-1, e.shape[-1])

    @cached_property
    def relations(self) -> np.ndarray:
        """Integer basis of ``{l : l @ E_dephased = 0}``; rows are relations."""
        import sympy

        _, ed = self._dephased
        basis = sympy.Matrix(ed.T.tolist()).nullspace()
        rows = []
        for v in basis:
            v = list(v)
            if not all(x.is_integer for x in v):
                raise MubCubeError(f"relation lattice of template {self.name} is not integral")
            rows.append([int(x) for x in v])
        return np.array(rows, dtype=int).reshape(-1, ed.shape[0])

    def match_dephased(self, n: np.ndarray, tol: float) -> np.ndarray:
        """Residuals of the relations for stacks of dephased matrices ``n`` (..., d, d)."""
        d = n.shape[-1]
        return self._match_phases(np.angle(n[..., 1:, 1:]).reshape(n.shape[:-2] + ((d - 1) ** 2,)))

    def _match_phases(self, phases: np.ndarray) -> np.ndarray:
        kd, _ = self._dephased
        rel = self.relations
        total = (phases - np.angle(kd)) @ rel.T
        wrapped = np.abs((total + np.pi) % (2 * np.pi) - np.pi)
        return np.max(wrapped / np.maximum(np.abs(rel).sum(axis=1), 1), axis=-1)

    def equivalent_member(self, h, tol: float = EXACT_TOL) -> TemplateMatch | None:
        """Row/column orders realizing membership up to Hadamard equivalence, or None.

        All 6!*6! orders are covered by grouping them by the pivot moved to (0, 0).
        """
        m = _entries6(h)
        d = 6
        # per-entry phase error of a dephased entry is at most four times the input error
        thresh = 4 * tol
        orders = _pivot_orders(d)
        for a in range(d):
            for b in range(d):
                r, c = dephase_factors(m, a, b)
                ph = np.angle(r[:, None] * m * c[None, :])
                sig, tau = orders[a], orders[b]
                stack = ph[sig[:, 1:, None, None], tau[None, None, :, 1:]]
                stack = stack.transpose(0, 2, 1, 3).reshape(len(sig), len(tau), (d - 1) ** 2)
                res = self._match_phases(stack)
                hit = np.argwhere(res <= thresh)
                if hit.size:
                    i, j = hit[0]
                    return TemplateMatch(self.name, tuple(int(s) for s in sig[i]), tuple(int(t) for t in tau[j]), float(res[i, j]))
        return None


@lru_cache(maxsize=None)
def _pivot_orders(d: int) -> dict:
    """For each pivot p, all orders of range(d) that start with p."""
    rest = list(permutations(range(1, d)))
    orders = {}
    for p in range(d):
        others = [c for c in range(d) if c != p]
        orders[p] = np.array([(p,) + tuple(others[i - 1] for i in q) for q in rest], dtype=int)
    return orders


def _fourier_t_template() -> MonomialTemplate:
    e = np.zeros((6, 6, 2), dtype=int)
    e[[1, 4], 3:, 0] = 1
    e[[2, 5], 3:, 1] = 1
    return MonomialTemplate("fourier_t", fourier_transposed_matrix(1, 1), e)


def _szollosi_template() -> MonomialTemplate:
    # circulant index patterns for (a, b, c) and (d, e, f)
    shift = (np.arange(3)[None, :] - np.arange(3)[:, None]) % 3
    k = np.ones((6, 6), dtype=np.complex128)
    e = np.zeros((6, 6, 6), dtype=int)
    for i in range(3):
        for j in range(3):
            e[i, j, shift[i, j]] = 1
            e[i, 3 + j, 3 + shift[i, j]] = 1
            # bottom-left = circ(d,e,f)^*, bottom-right = -circ(a,b,c)^*
            e[3 + i, j, 3 + shift[j, i]] = -1
            e[3 + i, 3 + j, shift[j, i]] = -1
            k[3 + i, 3 + j] = -1
    return MonomialTemplate("szollosi", k, e)


FOURIER_T = _fourier_t_template()
FOURIER = FOURIER_T.transposed("fourier")
SZOLLOSI = _szollosi_template()
FAMILIES = {t.name: t for t in (FOURIER, FOURIER_T, SZOLLOSI)}


def has_minus_one_invariant(h, tol: float = EXACT_TOL) -> bool:
    """True iff some Haagerup invariant of ``h`` is within ``8 * tol`` of -1.

    Every Fourier-family member has one (rows 0 and 3 of F^T differ by signs),
    and the Haagerup set is invariant under equivalence and transposition.
    """
    return bool(np.min(np.abs(haagerup(_entries6(h)) + 1)) <= 8 * tol)


def in_family(h, family: str, tol: float = EXACT_TOL) -> TemplateMatch | None:
    """Membership of ``h`` in a named family up to Hadamard equivalence."""
    try:
        template = FAMILIES[family]
    except KeyError:
        raise MubCubeError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    if family in ("fourier", "fourier_t") and not has_minus_one_invariant(h, tol):
        return None
    return template.equivalent_member(h, tol)


def family_labels(h, tol: float = EXACT_TOL) -> set[str]:
    return {name for name in FAMILIES if in_family(h, name, tol) is not None}


ROLES = ("fourier", "szollosi", "fourier_t")


def zauner_roles(transitions, tol: float = EXACT_TOL) -> tuple | None:
    """Assign the roles Fourier / Szöllősi / transposed Fourier to three transition matrices.

    Returns the role of each matrix in order, or None when no assignment of
    distinct roles is consistent with the family memberships. Memberships are
    evaluated lazily, so the first consistent assignment stops the scan.
    """
    cache = {}

    def member(i, role):
        if (i, role) not in cache:
            cache[i, role] = in_family(transitions[i], role, tol) is not None
        return cache[i, role]

    for roles in permutations(ROLES):
        if all(member(i, r) for i, r in enumerate(roles)):
            return roles
    return None


@dataclass(frozen=True)
class ZaunerTriplet:
    triplet: MubSystem
    szollosi_form: bool
    szollosi_equivalent: bool


def zauner_triplet(f1, f2, tol: float = EXACT_TOL, check_equivalence: bool = True) -> ZaunerTriplet:
    """Validate ``(I, F1/sqrt6, F2/sqrt6)`` as an MUB-triplet.

    Also reports whether the middle transition ``F1^* F2 / sqrt6`` has the
    Szöllősi pattern as given and up to equivalence.
    """
    f1, f2 = as_complex_matrix(f1, 6), as_complex_matrix(f2, 6)
    s = np.sqrt(6)
    triplet = validate_mub([np.eye(6), f1 / s, f2 / s], tol)
    middle = dagger(f1) @ f2 / s
    form = detect_szollosi_form(middle, s * tol)
    equiv = form or (check_equivalence and in_family(middle, "szollosi", s * tol) is not None)
    return ZaunerTriplet(triplet, form, bool(equiv))
