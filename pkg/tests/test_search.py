import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubcube.errors import MubCubeError
from mubcube.fixtures import zauner_pair
from mubcube.search import (
    ExperimentReport,
    PhasePoint,
    SearchConfig,
    SearchOutcome,
    experiment,
    loss,
    loss_and_gradient,
    loss_terms,
    optimize,
    phase_gradient,
    phase_loss,
    run_seed,
    zauner_pair_from_triplet,
)

H = 1e-6


@pytest.fixture(scope="module")
def exact_triplet():
    f1, f2 = zauner_pair()
    s = np.sqrt(6)
    return np.array([np.eye(6), f1 / s, f2 / s])


def fd_complex_gradient(xs):
    """Central differences in the real and imaginary part of every entry."""
    g = np.zeros_like(xs)
    for idx in np.ndindex(xs.shape):
        for unit, part in ((1.0, 1.0), (1j, 1j)):
            e = np.zeros_like(xs)
            e[idx] = unit * H
            d = (loss(*(xs + e)) - loss(*(xs - e))) / (2 * H)
            g[idx] += part * d
    return g


def fd_phase_gradient(theta):
    g = np.zeros_like(theta)
    for idx in np.ndindex(theta.shape):
        e = np.zeros_like(theta)
        e[idx] = H
        g[idx] = (phase_loss(PhasePoint(theta + e)) - phase_loss(PhasePoint(theta - e))) / (2 * H)
    return g


def test_loss_vanishes_on_triplet(exact_triplet):
    assert loss(*exact_triplet) < 1e-20
    value, g = loss_and_gradient(exact_triplet)
    assert np.max(np.abs(g)) <= 1e-10


def test_loss_identity_closed_form():
    eye = np.eye(6)
    orth, unb = loss_terms(eye, eye, eye)
    assert orth == 0
    assert unb == pytest.approx(3 * (6 * (1 - 1 / np.sqrt(6)) ** 2 + 5), rel=1e-14)


def test_loss_invariances(rng):
    xs = PhasePoint.random(rng).bases()
    base = loss(*xs)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    assert loss(*(q @ x for x in xs)) == pytest.approx(base, rel=1e-12)
    phased = [x * np.exp(2j * np.pi * rng.random(6)) for x in xs]
    assert loss(*phased) == pytest.approx(base, rel=1e-12)


def test_complex_gradient_matches_finite_differences(rng):
    xs = PhasePoint.random(rng).bases() + 0.05 * (rng.normal(size=(3, 6, 6)) + 1j * rng.normal(size=(3, 6, 6)))
    _, g = loss_and_gradient(xs)
    assert np.max(np.abs(g - fd_complex_gradient(xs))) <= 1e-5


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_phase_gradient_matches_finite_differences(seed):
    p = PhasePoint.random(np.random.default_rng(seed))
    assert np.max(np.abs(phase_gradient(p) - fd_phase_gradient(p.theta))) <= 1e-5


def test_phase_shift_invariance(rng):
    p = PhasePoint.random(rng)
    shifted = PhasePoint(p.theta + rng.uniform(0, 2 * np.pi, (3, 1, 6)))
    orth, _ = loss_terms(*p.bases())
    orth2, _ = loss_terms(*shifted.bases())
    assert orth == pytest.approx(orth2, rel=1e-12, abs=1e-14)
    assert phase_loss(p.normalized()) == pytest.approx(phase_loss(p), rel=1e-12)


def test_phase_point_validation():
    with pytest.raises(MubCubeError):
        PhasePoint(np.zeros((2, 6, 6)))
    with pytest.raises(MubCubeError):
        PhasePoint(np.full((3, 6, 6), np.nan))
    p = PhasePoint(np.zeros((3, 6, 6)))
    assert not p.theta.flags.writeable


def test_config_validation_and_round_trip():
    cfg = SearchConfig(max_iters=10, momentum=0.5)
    assert SearchConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    for bad in ({"max_iters": 0}, {"shrink": 1.0}, {"momentum": 1.0}, {"loss_threshold": -1}):
        with pytest.raises(MubCubeError):
            SearchConfig(**bad)
    with pytest.raises(MubCubeError):
        SearchConfig.from_json({"nope": 1})


def test_optimize_is_deterministic():
    cfg = SearchConfig(max_iters=300, probe_families=False)
    a, b = optimize(7, cfg), optimize(7, cfg)
    assert a.summary() == b.summary()


def test_optimize_converges_and_validates():
    out = optimize(0)
    assert out.converged
    assert out.axioms_passed
    assert out.unbiasedness_residual <= 1e-6
    assert out.piercing_residual <= 6e-6
    assert out.polished_loss <= out.loss
    back = SearchOutcome.from_json(json.loads(json.dumps(out.to_json())))
    assert back.summary() == json.loads(json.dumps(out.summary()))


def test_run_seed_derivation():
    assert run_seed(0, 0) == int(np.random.SeedSequence([0, 0]).generate_state(1, np.uint64)[0])
    assert len({run_seed(0, i) for i in range(50)}) == 50
    assert run_seed(0, 1) != run_seed(1, 0)


def test_single_run_experiment():
    cfg = SearchConfig(max_iters=200)
    rep = experiment(1, cfg, jobs=1, master_seed=3)
    assert rep.runs == 1
    doc = json.loads(json.dumps(rep.to_json()))
    assert sum(doc[k] for k in ("stuck", "generic", "exceptional", "other")) == 1
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == ExperimentReport.CSV_COLUMNS and len(rows) == 2
    with pytest.raises(MubCubeError):
        experiment(0, cfg)


def test_parallel_matches_serial():
    cfg = SearchConfig(max_iters=100, probe_families=False)
    a = experiment(3, cfg, jobs=1, master_seed=5)
    b = experiment(3, cfg, jobs=2, master_seed=5)
    assert [o.summary() for o in a.outcomes] == [o.summary() for o in b.outcomes]


def test_found_triplets_pass_axioms(found_triplets):
    assert found_triplets
    for o in found_triplets:
        assert o.axioms_passed
        assert o.unbiasedness_residual <= 1e-6
        assert o.piercing_residual <= 6e-6


def test_zauner_pair_rotation(found_triplets):
    for o in found_triplets:
        if o.roles is not None:
            f1, f2 = zauner_pair_from_triplet(o.triplet, o.roles)
            assert np.allclose(np.abs(f1), 1, atol=1e-6) and np.allclose(np.abs(f2), 1, atol=1e-6)
            break
    with pytest.raises(MubCubeError):
        zauner_pair_from_triplet(o.triplet, ("fourier", "fourier", "fourier"))
