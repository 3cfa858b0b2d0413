"""RBF kernel, the expected-RBF kernel on Gaussian points, and its Monte-Carlo check.

A Gaussian point ``(x, S)`` stands for the random vector ``x + S^{1/2} e``
with ``e ~ N(0, I)``. Two Gaussian points share the *same* ``e``; the kernel
between them is the expectation of the RBF kernel under that coupling, which
has the closed form

    kappa = det(I + U^2)^{-1/2} * exp(-|x_a - x_b|^2_{(I + U^2)^{-1}} / (2 sigma^2))

with ``U = (S_a^{1/2} - S_b^{1/2}) / sigma``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_PSD_TOL, as_symmetric, cholesky, log_det_from_cholesky, sym_psd_sqrt, weighted_sq_norm

MC_CHUNK = 100_000


@dataclass(frozen=True)
class KernelParams:
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class GaussianPoint:
    """A mean vector with a PSD covariance matrix.

    The symmetric square root of the covariance is computed once and cached.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = as_symmetric(np.array(self.cov, dtype=float))
        if cov.ndim != 2 or cov.shape[0] != mean.shape[0]:
            raise DimensionMismatch(f"mean of length {mean.shape[0]} with covariance of shape {cov.shape}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        # validate eagerly so invalid points never exist
        self.cov_sqrt

    @classmethod
    def exact(cls, mean):
        """Point with zero covariance."""
        mean = np.asarray(mean, dtype=float).reshape(-1)
        return cls(mean, np.zeros((mean.size, mean.size)))

    @property
    def dim(self):
        return self.mean.shape[0]

    @cached_property
    def cov_sqrt(self):
        s = sym_psd_sqrt(self.cov, DEFAULT_PSD_TOL)
        s.flags.writeable = False
        return s

    def __eq__(self, other):
        if not isinstance(other, GaussianPoint):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def __hash__(self):
        return hash((self.mean.tobytes(), self.cov.tobytes()))


def rbf_kernel(x, y, params):
    """``exp(-|x - y|^2 / (2 sigma^2))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"dimensions {x.shape[-1]} and {y.shape[-1]} differ")
    d = x - y
    return np.exp(-np.sum(d * d, axis=-1) / (2.0 * params.sigma**2))


def pk_kernel_from_roots(mean_a, root_a, mean_b, root_b, sigma):
    """Batched expected-RBF kernel from means and covariance square roots.

    Arguments broadcast against each other over leading axes; means have
    shape ``(..., n)`` and roots ``(..., n, n)``.
    """
    n = mean_a.shape[-1]
    u = (root_a - root_b) / sigma
    m = np.eye(n) + np.einsum("...ij,...jk->...ik", u, u)
    L = cholesky(m)
    log_det = log_det_from_cholesky(L)
    q = weighted_sq_norm(mean_a - mean_b, L)
    return np.exp(-0.5 * log_det - q / (2.0 * sigma**2))


def pk_kernel(a, b, params):
    """Expected RBF kernel between two Gaussian points under shared-noise coupling."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    return float(pk_kernel_from_roots(a.mean, a.cov_sqrt, b.mean, b.cov_sqrt, params.sigma))


def stack_points(points):
    """Means ``(N, n)`` and covariance roots ``(N, n, n)`` of a list of points."""
    if len(points) == 0:
        raise ValueError("no points given")
    dim = points[0].dim
    if any(p.dim != dim for p in points):
        raise DimensionMismatch("points have differing dimensions")
    means = np.stack([p.mean for p in points])
    roots = np.stack([p.cov_sqrt for p in points])
    return means, roots


def gram_from_roots(means, roots, sigma):
    """Gram matrix from stacked means and roots; only the upper triangle is computed."""
    N = means.shape[0]
    iu, ju = np.triu_indices(N, k=1)
    G = np.eye(N)
    if iu.size:
        vals = pk_kernel_from_roots(means[iu], roots[iu], means[ju], roots[ju], sigma)
        G[iu, ju] = vals
        G[ju, iu] = vals
    return G


def gram_matrix(points, params):
    """Dense symmetric Gram matrix ``G[i, j] = pk_kernel(points[i], points[j])``."""
    means, roots = stack_points(points)
    return gram_from_roots(means, roots, params.sigma)


def cross_kernel(means, roots, query_means, query_root, sigma):
    """Kernel values between each query mean (sharing one covariance root) and each point.

    Returns an array of shape ``(Q, N)``.
    """
    qm = np.asarray(query_means, dtype=float)
    return pk_kernel_from_roots(means[None, :, :], roots[None, :, :, :],
                                qm[:, None, :], query_root[None, None, :, :], sigma)


def monte_carlo_kernel(a, b, params, samples, seed):
    """Monte-Carlo estimate of the expected RBF kernel with a shared noise draw.

    Each sample draws one ``e ~ N(0, I)`` and evaluates the RBF kernel at
    ``x_a + S_a^{1/2} e`` and ``x_b + S_b^{1/2} e``. Samples are drawn in
    fixed-size chunks, each from its own child seed, so the estimate depends
    only on ``(seed, samples)``.

    Returns
    -------
    tuple of float
        ``(estimate, std_error)``, the sample mean and the standard error of
        the mean (infinite when ``samples == 1``, where it is undefined).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n_chunks = -(-samples // MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    # Accumulate deviations from the first sample: exact when all samples agree,
    # and avoids cancellation in the variance.
    ref = None
    dev_sum = 0.0
    dev_sq = 0.0
    for k, child in enumerate(children):
        size = min(MC_CHUNK, samples - k * MC_CHUNK)
        eps = np.random.Generator(np.random.PCG64(child)).standard_normal((size, a.dim))
        vals = rbf_kernel(a.mean + eps @ a.cov_sqrt, b.mean + eps @ b.cov_sqrt, params)
        if ref is None:
            ref = float(vals[0])
        dev = vals - ref
        dev_sum += float(np.sum(dev))
        dev_sq += float(np.sum(dev * dev))
    mean_dev = dev_sum / samples
    if samples == 1:
        return ref, float("inf")
    var = max(dev_sq - samples * mean_dev * mean_dev, 0.0) / (samples - 1)
    return ref + mean_dev, float(np.sqrt(var / samples))
