"""Dense symmetric-matrix primitives.

All functions accept a single matrix or a stack of matrices with leading
batch dimensions (``(..., n, n)``). The Cholesky factorization and the
triangular solve are written as loops over the (small) matrix dimension and
vectorized over the batch, so a result never depends on how many matrices
were processed together.
"""

import numpy as np

from .errors import DimensionMismatch, NotPSD, NotSPD

DEFAULT_PSD_TOL = 1e-8


def as_symmetric(m):
    """Return ``m`` as a float array after checking it is square and exactly symmetric."""
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise DimensionMismatch(f"expected square matrix, got shape {m.shape}")
    if not np.array_equal(m, np.swapaxes(m, -1, -2)):
        raise ValueError("matrix is not symmetric")
    return m


def check_psd(m, tol=DEFAULT_PSD_TOL):
    """Raise NotPSD unless every eigenvalue is at least ``-tol * max(1, lambda_max)``.

    Returns the eigenvalues and eigenvectors so callers need not recompute them.
    """
    m = as_symmetric(m)
    w, v = np.linalg.eigh(m)
    lam_max = w[..., -1]
    floor = -tol * np.maximum(1.0, lam_max)
    bad = w[..., 0] < floor
    if np.any(bad):
        worst = float(np.min(w[..., 0]))
        raise NotPSD(f"matrix has eigenvalue {worst:.3e} below tolerance")
    return w, v


def sym_psd_sqrt(m, tol=DEFAULT_PSD_TOL):
    """Unique symmetric PSD square root via spectral decomposition.

    Eigenvalues within tolerance below zero are clamped to zero before the
    square root is taken.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Symmetric positive semidefinite matrix (or stack of them).
    tol : float
        Relative tolerance for negative eigenvalues.

    Returns
    -------
    numpy.ndarray
        Symmetric ``S`` with ``S @ S ~= m``.
    """
    w, v = check_psd(m, tol)
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (v * root[..., None, :]) @ np.swapaxes(v, -1, -2)
    # Symmetrize exactly; eigh reconstruction is only symmetric to rounding.
    return 0.5 * (s + np.swapaxes(s, -1, -2))


def cholesky(m):
    """Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises NotSPD on the first non-positive pivot.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {m.shape}")
    n = m.shape[-1]
    L = np.zeros_like(m)
    for j in range(n):
        pivot = m[..., j, j] - np.sum(L[..., j, :j] ** 2, axis=-1)
        if np.any(~(pivot > 0.0)):
            raise NotSPD(f"non-positive pivot at index {j}")
        d = np.sqrt(pivot)
        L[..., j, j] = d
        for i in range(j + 1, n):
            s = m[..., i, j] - np.sum(L[..., i, :j] * L[..., j, :j], axis=-1)
            L[..., i, j] = s / d
    return L


def log_det_from_cholesky(L):
    """``log det(L @ L.T)`` computed as ``2 * sum(log(diag(L)))``."""
    L = np.asarray(L, dtype=float)
    return 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)


def forward_substitute(L, v):
    """Solve ``L z = v`` for lower-triangular ``L`` (batched over leading axes)."""
    L = np.asarray(L, dtype=float)
    v = np.asarray(v, dtype=float)
    n = L.shape[-1]
    if v.shape[-1] != n:
        raise DimensionMismatch(f"vector of length {v.shape[-1]} vs factor of dim {n}")
    z = np.zeros(np.broadcast_shapes(L.shape[:-1], v.shape))
    for k in range(n):
        s = v[..., k] - np.sum(L[..., k, :k] * z[..., :k], axis=-1)
        z[..., k] = s / L[..., k, k]
    return z


def weighted_sq_norm(v, L):
    """``v.T @ inv(M) @ v`` where ``M = L @ L.T``, without forming ``inv(M)``.

    With ``z = L^{-1} v`` the quadratic form is ``z.T z``.
    """
    z = forward_substitute(L, v)
    return np.sum(z * z, axis=-1)
