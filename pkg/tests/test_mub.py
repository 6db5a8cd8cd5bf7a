import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubcube.errors import NotEquivalent, NotUnbiased, NotUnitary
from mubcube.families import fourier_transposed_matrix
from mubcube.hadamard import haagerup
from mubcube.mub import (
    MubSystem,
    directly_equivalent_pairs,
    directly_equivalent_triplets,
    mub_residuals,
    permutationally_equivalent_pairs,
    transition,
    validate_mub,
)
from mubcube.numerics import random_phases, random_unitary

seeds = st.integers(0, 2**32 - 1)
S6 = np.sqrt(6)


def inner_products_unbiased(bases, tol=1e-12):
    """Oracle: every |<e_j, f_k>| across distinct bases, one inner product at a time."""
    d = bases[0].shape[0]
    for a in range(len(bases)):
        for b in range(a + 1, len(bases)):
            for j in range(d):
                for k in range(d):
                    if abs(abs(np.vdot(bases[a][:, j], bases[b][:, k])) - 1 / np.sqrt(d)) > tol:
                        return False
    return True


def test_fourier_pair_is_valid():
    validate_mub([np.eye(6), fourier_transposed_matrix(1, 1).T / S6])


def test_identity_pair_is_biased():
    with pytest.raises(NotUnbiased) as err:
        validate_mub([np.eye(3), np.eye(3)])
    assert (err.value.i, err.value.j) == (0, 1)


def test_non_unitary_basis_rejected():
    with pytest.raises(NotUnitary):
        validate_mub([np.eye(3), 2 * np.eye(3)])


def test_standard_triplets_match_inner_product_oracle(triplet_d2, triplet_d3):
    for t in (triplet_d2, triplet_d3):
        assert inner_products_unbiased(t.bases)
        assert isinstance(t, MubSystem) and len(t) == 3


def test_transition_d2_is_sylvester():
    h = transition(np.eye(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    assert np.allclose(h.entries, [[1, 1], [1, -1]])


def test_transition_reverse_is_adjoint(triplet_d3):
    x, y = triplet_d3[0], triplet_d3[1]
    assert np.allclose(transition(y, x).entries, transition(x, y).entries.conj().T)
    assert np.allclose(np.abs(transition(x, y).entries), 1)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_unitary_rotation_preserves_residuals(seed):
    rng = np.random.default_rng(seed)
    from mubcube.fixtures import standard_triplet

    t = standard_triplet(3)
    r = t.rotated(random_unitary(3, rng))
    a, b = mub_residuals(t.bases), mub_residuals(r.bases)
    assert np.allclose(list(a["unbiasedness"].values()), list(b["unbiasedness"].values()), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_direct_pair_equivalence_recovers_intertwiner(seed):
    rng = np.random.default_rng(seed)
    x, y = np.eye(6), fourier_transposed_matrix(np.exp(1j), np.exp(2j)) / S6
    u0 = random_unitary(6, rng)
    v = u0 @ x * random_phases(6, rng)[None, :]
    w = u0 @ y * random_phases(6, rng)[None, :]
    u = directly_equivalent_pairs((x, y), (v, w))
    assert np.allclose(u.conj().T @ u, np.eye(6), atol=1e-9)
    # U maps each vector onto the matching vector up to a phase
    for a, b in ((x, v), (y, w)):
        overlap = np.abs(np.einsum("ij,ij->j", np.conj(b), u @ a))
        assert np.allclose(overlap, 1, atol=1e-9)


def test_pair_with_itself_gives_phase_identity():
    x, y = np.eye(6), fourier_transposed_matrix(1, 1) / S6
    rng = np.random.default_rng(3)
    u = directly_equivalent_pairs((x, y), (x * random_phases(6, rng), y * random_phases(6, rng)))
    assert np.allclose(u, u[0, 0] * np.eye(6), atol=1e-9)


def test_different_family_points_are_not_directly_equivalent():
    f1 = fourier_transposed_matrix(1, 1)
    f2 = fourier_transposed_matrix(np.exp(0.5j), np.exp(1.3j))
    assert np.max(np.abs(haagerup(f1) - haagerup(f2))) > 1e-3
    with pytest.raises(NotEquivalent):
        directly_equivalent_pairs((np.eye(6), f1 / S6), (np.eye(6), f2 / S6))


def test_permutational_pair_equivalence(triplet_d3):
    x, y = triplet_d3[0], triplet_d3[1]
    w = permutationally_equivalent_pairs((x, y), (y, x))
    assert w is not None
    w2 = permutationally_equivalent_pairs((x, y), (x[:, [2, 0, 1]], y[:, [1, 2, 0]]))
    assert w2 is not None and w2.branch == "direct"


def test_permutational_pair_inequivalence():
    f1 = fourier_transposed_matrix(np.exp(0.4j), np.exp(1.1j))
    f2 = fourier_transposed_matrix(np.exp(2.0j), np.exp(0.7j))
    assert permutationally_equivalent_pairs((np.eye(6), f1 / S6), (np.eye(6), f2 / S6)) is None


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_triplet_equivalence_under_rotation_and_phases(seed):
    from mubcube.fixtures import standard_triplet

    rng = np.random.default_rng(seed)
    t = standard_triplet(3)
    u = random_unitary(3, rng)
    t2 = MubSystem(tuple(u @ b * random_phases(3, rng)[None, :] for b in t.bases))
    assert directly_equivalent_triplets(t, t2)


def test_triplet_with_reordered_third_basis_differs(triplet_d3):
    t2 = MubSystem((triplet_d3[0], triplet_d3[1], triplet_d3[2][:, [1, 0, 2]]))
    assert not directly_equivalent_triplets(triplet_d3, t2)


def test_mub_json_round_trip(triplet_d3):
    back = MubSystem.from_json(triplet_d3.to_json())
    assert all(np.array_equal(a, b) for a, b in zip(back.bases, triplet_d3.bases))
