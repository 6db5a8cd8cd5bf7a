import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubcube.cube import build_cube, verify_axioms
from mubcube.errors import MubCubeError, NotUnbiased
from mubcube.families import (
    FAMILIES,
    OMEGA,
    FourierParams,
    circulant,
    detect_szollosi_form,
    detect_two_circulant,
    exceptional_reference,
    family_labels,
    fourier,
    fourier_transposed,
    in_family,
    szollosi_template,
    zauner_roles,
    zauner_triplet,
)
from mubcube.fixtures import zauner_pair
from mubcube.hadamard import adjoint_equivalent, equivalent, is_hadamard
from mubcube.numerics import random_phases

turns = st.floats(0, 1, allow_nan=False)


def szollosi_instance(seed=1):
    """Fit unimodular a..f so the template is Hadamard (oracle by least squares)."""

    def defect(t):
        s = szollosi_template(*np.exp(1j * t))
        return np.sum(np.abs(s.conj().T @ s - 6 * np.eye(6)) ** 2)

    rng = np.random.default_rng(seed)
    t, step = rng.uniform(0, 2 * np.pi, 6), 1e-2
    for _ in range(5000):
        v = defect(t)
        if v < 1e-26:
            break
        g = np.array([(defect(t + 1e-7 * e) - defect(t - 1e-7 * e)) / 2e-7 for e in np.eye(6)])
        while defect(t - step * g) > v - 1e-4 * step * (g @ g) and step > 1e-16:
            step /= 2
        t, step = t - step * g, 2 * step
    return szollosi_template(*np.exp(1j * t))


@pytest.fixture(scope="module")
def szollosi():
    s = szollosi_instance()
    assert is_hadamard(s)
    return s


def test_fourier_transposed_entries():
    f = fourier_transposed(0.6 + 0.8j, 1j).entries
    assert np.allclose(f[0], 1) and np.allclose(f[3], [1, 1, 1, -1, -1, -1])
    assert f[1, 3] == pytest.approx(0.6 + 0.8j)
    assert f[1, 4] == pytest.approx(OMEGA**2 * (0.6 + 0.8j))


@settings(max_examples=50, deadline=None)
@given(turns, turns)
def test_fourier_transposed_is_hadamard_everywhere(tx, ty):
    p = FourierParams.from_turns(tx, ty)
    assert is_hadamard(fourier_transposed(p))
    assert np.array_equal(fourier(p).entries, fourier_transposed(p).entries.T)


def test_fourier_first_column_is_ones():
    assert np.allclose(fourier(1, 1).entries[:, 0], 1)


def test_params_must_be_unimodular():
    with pytest.raises(MubCubeError):
        FourierParams(2.0, 1.0)


def test_circulant_rows_are_right_shifts():
    assert np.array_equal(circulant([1, 2, 3]), [[1, 2, 3], [3, 1, 2], [2, 3, 1]])


def test_template_pattern_matches_display():
    a, b, c, d, e, f = np.exp(1j * np.arange(1, 7))
    s = szollosi_template(a, b, c, d, e, f)
    assert np.allclose(s[1], [c, a, b, f, d, e])
    assert np.allclose(s[3], np.conj([d, f, e, -a, -c, -b]))
    assert np.allclose(s[5], np.conj([f, e, d, -c, -b, -a]))


def test_szollosi_detection(szollosi):
    assert detect_szollosi_form(szollosi)
    assert detect_two_circulant(szollosi) is not None
    assert not detect_szollosi_form(fourier_transposed(1, 1))
    assert detect_two_circulant(fourier_transposed(1, 1)) is None


def test_szollosi_family_is_self_adjoint(szollosi):
    assert adjoint_equivalent(szollosi, szollosi.conj().T) is not None
    assert in_family(szollosi.conj().T, "szollosi") is not None


def test_exceptional_reference():
    h = exceptional_reference()
    blocks = detect_two_circulant(h)
    assert blocks is not None
    assert np.allclose(blocks.D, -blocks.A) and np.allclose(blocks.B, blocks.A)
    assert equivalent(h, fourier(1, 1)) is not None


def test_family_intersection_point():
    # the transposed family meets the Szöllősi family at F^T(w, w)
    ftww = fourier_transposed(OMEGA, OMEGA)
    assert in_family(ftww, "szollosi") is not None
    assert in_family(ftww, "fourier_t") is not None


def test_fourier_ww_is_adjoint_equivalent_to_transposed():
    f, ft = fourier(OMEGA, OMEGA), fourier_transposed(OMEGA, OMEGA)
    assert equivalent(f, ft) is None
    w = adjoint_equivalent(f, ft)
    assert w is not None and w.branch == "adjoint"


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scrambled_members_are_recognized(seed):
    rng = np.random.default_rng(seed)
    x, y = random_phases(2, rng)
    h = fourier_transposed(x, y).entries
    p, q = rng.permutation(6), rng.permutation(6)
    h = (random_phases(6, rng)[:, None] * h * random_phases(6, rng)[None, :])[np.ix_(p, q)]
    assert family_labels(h) == {"fourier_t"}
    assert family_labels(h.T) == {"fourier"}


def test_unknown_family():
    with pytest.raises(MubCubeError):
        in_family(np.eye(6), "nope")
    assert set(FAMILIES) == {"fourier", "fourier_t", "szollosi"}


def test_zauner_fixture_triplet():
    f1, f2 = zauner_pair()
    z = zauner_triplet(f1, f2)
    assert z.szollosi_equivalent
    assert verify_axioms(build_cube(z.triplet)).passed
    hs = [h.entries for h in z.triplet.transitions()]
    assert zauner_roles(hs, 1e-8) == ("fourier_t", "szollosi", "fourier")


def test_zauner_identical_factors_rejected():
    f1, _ = zauner_pair()
    with pytest.raises(NotUnbiased):
        zauner_triplet(f1, f1)
