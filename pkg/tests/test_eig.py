import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from stabcs.diabatize import two_level_energies
from stabcs.eig import c_normalize, eig_complex, eig_symmetric, eigvals_complex
from stabcs.errors import NotSymmetric


def test_diagonal():
    es = eig_symmetric(np.diag([2.0, 3.0]))
    assert np.allclose(es.values, [2, 3])


def test_two_by_two_vectors():
    es = eig_symmetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(es.values, [-1, 1])
    s = 1 / np.sqrt(2)
    # largest component positive; ties resolved by the first entry
    assert np.allclose(np.abs(es.vectors), s)
    assert np.allclose(es.vectors[:, 0] @ es.vectors[:, 1], 0)


def test_reconstruction_random():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(50, 50))
    a = a + a.T
    es = eig_symmetric(a)
    assert np.max(np.abs(a - es.vectors @ np.diag(es.values) @ es.vectors.T)) < 1e-10
    idx = np.argmax(np.abs(es.vectors), axis=0)
    assert np.all(es.vectors[idx, np.arange(50)] > 0)


def test_not_symmetric():
    with pytest.raises(NotSymmetric):
        eig_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotSymmetric):
        eig_symmetric(np.ones((2, 3)))


def test_complex_diagonal_sorted():
    es = eig_complex(np.diag([3 - 1j, 1 + 2j]))
    assert np.allclose(es.values, [1 + 2j, 3 - 1j])


def test_c_normalization():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    a = a + a.T
    es = eig_complex(a)
    assert np.allclose(es.vectors.T @ es.vectors, np.eye(6), atol=1e-10)


def test_exceptional_point_of_two_level_matrix():
    E_r, delta = 1.5, 0.01
    h = np.array([[E_r, delta / 2], [delta / 2, E_r - 1j * delta]])
    es = eig_complex(h)
    assert np.allclose(es.values, E_r - 0.5j * delta, atol=1e-7)
    assert es.degenerate or abs(es.values[0] - es.values[1]) < 1e-7
    # the coalesced vector is self-orthogonal and is left at unit norm
    v = c_normalize(np.array([[1.0], [1j]]))
    assert np.allclose(np.linalg.norm(v), 1)


def test_arrowhead_against_characteristic_polynomial():
    rng = np.random.default_rng(11)
    d = rng.normal(size=3) + 1j * rng.normal(size=3)
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    a = np.diag(d)
    a[0, 1:] = a[1:, 0] = c
    # det(zI - A) for an arrowhead, expanded by hand
    p = (np.poly1d([1, -d[0]]) * np.poly1d([1, -d[1]]) * np.poly1d([1, -d[2]])
         - c[0] ** 2 * np.poly1d([1, -d[2]]) - c[1] ** 2 * np.poly1d([1, -d[1]]))
    roots = np.roots(p.coeffs)
    roots = roots[np.lexsort((roots.imag, roots.real))]
    assert np.max(np.abs(eigvals_complex(a) - roots)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_symmetric_eigenpairs_property(m):
    a = m + m.T
    es = eig_symmetric(a)
    assert np.all(np.diff(es.values) >= 0)
    assert np.allclose(a @ es.vectors, es.vectors * es.values, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(1e-4, 0.1), st.floats(-0.5, 0.5))
def test_two_level_matches_eig(E_r, delta, shift):
    lo, hi = two_level_energies(E_r, E_r + shift, delta)
    w = eig_symmetric(np.array([[E_r, delta / 2], [delta / 2, E_r + shift]])).values
    assert np.allclose([lo, hi], w, atol=1e-12)
