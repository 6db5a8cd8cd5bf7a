import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubcube.cube import (
    HadamardCube,
    build_cube,
    classify,
    cube_from_hadamards,
    haagerup_condition,
    haagerup_residual_tensor,
    reconstruct_triplet,
    reconstruction_projections,
    slice_cube,
    verify_axioms,
    verify_inverse_orthogonal,
    verify_weak_conditions,
)
from mubcube.errors import DimensionNotSix, WeakConditionsFailed, ZeroEntry
from mubcube.families import fourier_transposed_matrix, zauner_triplet
from mubcube.fixtures import zauner_pair
from mubcube.mub import MubSystem, directly_equivalent_triplets
from mubcube.numerics import outer, random_phases, random_unitary

seeds = st.integers(0, 2**32 - 1)


def cube_oracle(t):
    """Entry-by-entry: sqrt(d^3) <e_j,f_k><f_k,g_l><g_l,e_j>."""
    x, y, z = t.bases
    d = x.shape[0]
    c = np.empty((d, d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            for l in range(d):
                c[j, k, l] = d**1.5 * np.vdot(x[:, j], y[:, k]) * np.vdot(y[:, k], z[:, l]) * np.vdot(z[:, l], x[:, j])
    return c


def random_hadamard_cube(rng):
    hs = [fourier_transposed_matrix(*random_phases(2, rng)) for _ in range(3)]
    hs = [random_phases(6, rng)[:, None] * h * random_phases(6, rng)[None, :] for h in hs]
    return cube_from_hadamards(*hs)


def test_build_cube_matches_inner_product_oracle(triplet_d2, triplet_d3):
    for t in (triplet_d2, triplet_d3):
        assert np.allclose(build_cube(t).entries, cube_oracle(t), atol=1e-12)


def test_d2_piercings_sum_to_sqrt2(triplet_d2):
    e = build_cube(triplet_d2).entries
    for axis in range(3):
        assert np.allclose(e.sum(axis=axis), np.sqrt(2), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_cube_invariant_under_rotation_and_phases(seed):
    from mubcube.fixtures import standard_triplet

    rng = np.random.default_rng(seed)
    t = standard_triplet(3)
    u = random_unitary(3, rng)
    t2 = MubSystem(tuple(u @ b * random_phases(3, rng)[None, :] for b in t.bases))
    assert np.allclose(build_cube(t).entries, build_cube(t2).entries, atol=1e-12)


def test_zauner_cube_horizontal_slices():
    f1, f2 = zauner_pair()
    c = build_cube(zauner_triplet(f1, f2).triplet).entries
    expected = np.einsum("jk,kl,lj->jkl", f1, f1.conj().T @ f2 / np.sqrt(6), f2.conj().T)
    assert np.allclose(c, expected, atol=1e-9)


def test_slices_reassemble(triplet_d3):
    c = build_cube(triplet_d3)
    e = c.entries
    assert np.array_equal(np.stack([slice_cube(c, 0, j) for j in range(3)], axis=0), e)
    assert np.array_equal(np.stack([slice_cube(c, 1, k) for k in range(3)], axis=1), e)
    assert np.array_equal(np.stack([slice_cube(c, 2, l) for l in range(3)], axis=2), e)


def test_axioms_hold_for_triplet_cubes(triplet_d2, triplet_d3):
    for t in (triplet_d2, triplet_d3):
        r = verify_axioms(build_cube(t))
        assert r.passed, r.failed()
        assert verify_weak_conditions(build_cube(t)).passed
        assert verify_inverse_orthogonal(build_cube(t)).passed


def test_random_hadamard_product_cube_fails_only_piercings(rng):
    r = verify_axioms(random_hadamard_cube(rng))
    assert r.failed() == ["piercing_sums"]
    assert "horizontal_piercing_sums" in verify_weak_conditions(random_hadamard_cube(rng)).failed()


def test_negated_entry_is_witnessed(triplet_d3):
    e = build_cube(triplet_d3).entries.copy()
    e[1, 2, 0] *= -1
    r = verify_axioms(e)
    assert not r.checks["piercing_sums"].passed
    axis, a, b = r.checks["piercing_sums"].witness
    assert (axis, a, b) in {(0, 2, 0), (1, 1, 0), (2, 1, 2)}


def test_haagerup_condition_on_triplet_cube(triplet_d3):
    c = build_cube(triplet_d3)
    assert haagerup_condition(c, (0, 1, 2), (0, 1, 2))
    assert np.max(haagerup_residual_tensor(c)) <= 1e-12


def test_haagerup_condition_fails_on_random_unimodular_cube(rng):
    c = np.exp(2j * np.pi * rng.random((4, 4, 4)))
    assert np.max(haagerup_residual_tensor(c)) > 1e-3
    assert haagerup_condition(c, (1, 1, 1), (1, 1, 1))


def test_inverse_orthogonal_differs_from_hadamard(triplet_d3):
    e = build_cube(triplet_d3).entries.copy()
    e[0, 0, 0] *= 2
    assert not verify_axioms(e).checks["unimodular"].passed
    assert "unimodular" not in verify_inverse_orthogonal(e).checks
    e[0, 0, 0] = 0
    with pytest.raises(ZeroEntry):
        verify_inverse_orthogonal(e)


def test_reconstruction_projections_are_rank_one(triplet_d3):
    y, r = reconstruction_projections(build_cube(triplet_d3))
    for rl in r:
        assert np.allclose(rl @ rl, rl, atol=1e-12)
        assert np.allclose(rl, rl.conj().T, atol=1e-12)
        assert np.trace(rl) == pytest.approx(1, abs=1e-12)


def test_projection_products_relate_by_adjoint(triplet_d3):
    # A_jk = P_j Q_k and Q_k P_j = A_jk^*
    _, f, _ = triplet_d3.bases
    e = np.eye(3)
    for j in range(3):
        for k in range(3):
            a = outer(e[:, j]) @ outer(f[:, k])
            assert np.allclose(outer(f[:, k]) @ outer(e[:, j]), a.conj().T)


def test_round_trips(triplet_d2, triplet_d3):
    for t in (triplet_d2, triplet_d3):
        c = build_cube(t)
        rec = reconstruct_triplet(c)
        assert np.max(np.abs(build_cube(rec).entries - c.entries)) <= 1e-12
        assert directly_equivalent_triplets(rec, t)
        assert np.allclose(rec[1], c.entries[:, :, -1] / np.sqrt(t.dim))


def test_reconstruction_rejects_bad_cube(triplet_d3):
    e = build_cube(triplet_d3).entries.copy()
    e[0, 0, 1] *= np.exp(0.3j)
    with pytest.raises(WeakConditionsFailed):
        reconstruct_triplet(e)


def test_classify_zauner_and_product_cube(rng):
    c = build_cube(zauner_triplet(*zauner_pair()).triplet)
    cl = classify(c)
    assert cl.label == "generic" and cl.n_values == 72 and cl.n_conjugate_pairs == 36
    assert classify(random_hadamard_cube(rng)).label == "other"


def test_classify_exceptional_value_set():
    # the label only depends on the value set, so any array of 24th roots qualifies
    omega24 = np.exp(2j * np.pi / 24)
    c = omega24 ** np.random.default_rng(0).integers(0, 24, (6, 6, 6))
    assert classify(c).label == "exceptional"


def test_classify_requires_d6(triplet_d3):
    with pytest.raises(DimensionNotSix):
        classify(build_cube(triplet_d3))


def test_cube_json_round_trip(triplet_d3):
    c = build_cube(triplet_d3)
    back = HadamardCube.from_json(json.loads(json.dumps(c.to_json())))
    assert np.array_equal(back.entries, c.entries)
