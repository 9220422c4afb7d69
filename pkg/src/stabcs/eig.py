"""Dense eigensolvers with the conventions the rest of the package relies on.

Real symmetric problems come back ascending with a deterministic sign for each
eigenvector.  General complex problems come back sorted by real part (ties by
imaginary part) with eigenvectors normalized under the c-product
``v.T @ v = 1`` (no conjugation), which is the natural metric for complex
symmetric matrices.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NotSymmetric

CLUSTER_TOL = 1e-8


@dataclass
class RealEigenSystem:
    values: np.ndarray
    vectors: np.ndarray


@dataclass
class ComplexEigenSystem:
    values: np.ndarray
    vectors: np.ndarray
    # index groups of eigenvalues closer than CLUSTER_TOL (near-defective pairs)
    clusters: list = field(default_factory=list)

    @property
    def degenerate(self):
        return bool(self.clusters)


def _fix_signs(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eig_symmetric(A, rtol=1e-10):
    """Full eigendecomposition of a real symmetric matrix.

    Eigenvalues ascend; each eigenvector has its largest-magnitude component
    positive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {A.shape}")
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.max(np.abs(A - A.T)) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric to %.1e relative" % rtol)
    try:
        w, v = scipy.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return RealEigenSystem(w, _fix_signs(v))


def eigvalsh(A):
    """Ascending eigenvalues of a real symmetric matrix, no checks."""
    try:
        return scipy.linalg.eigh(A, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def c_normalize(vectors):
    """Scale columns so that ``v.T @ v = 1``.

    Self-orthogonal columns (``v.T @ v ~ 0``, which happens at an exceptional
    point) are left with unit Euclidean norm instead.
    """
    vectors = np.array(vectors, dtype=complex)
    cnorm = np.sum(vectors * vectors, axis=0)
    ok = np.abs(cnorm) > 1e-12
    vectors[:, ok] /= np.sqrt(cnorm[ok])
    if not ok.all():
        vectors[:, ~ok] /= np.linalg.norm(vectors[:, ~ok], axis=0)
    return vectors


def _clusters(values, tol):
    groups = []
    n = len(values)
    seen = np.zeros(n, dtype=bool)
    for i in range(n):
        if seen[i]:
            continue
        close = np.flatnonzero(np.abs(values - values[i]) < tol)
        if len(close) > 1:
            seen[close] = True
            groups.append(tuple(int(k) for k in close))
    return groups


def eig_complex(A, cluster_tol=CLUSTER_TOL):
    """All eigenpairs of a general complex matrix.

    Eigenvalues are sorted by real part, ties broken by imaginary part.
    Eigenvectors are c-normalized, so for complex symmetric input
    ``V.T @ V`` is the identity away from degeneracies.  Eigenvalues closer
    than `cluster_tol` are reported in ``clusters`` instead of raising.
    """
    A = np.asarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise NoConvergence("matrix has non-finite entries")
    try:
        w, v = scipy.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = c_normalize(v[:, order])
    return ComplexEigenSystem(w, v, _clusters(w, cluster_tol))


def eigvals_complex(A):
    """Eigenvalues only, sorted as in :func:`eig_complex`."""
    try:
        w = scipy.linalg.eigvals(np.asarray(A, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w[np.lexsort((w.imag, w.real))]
