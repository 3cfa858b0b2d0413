"""Soft-margin dual SVM over Gaussian points, solved by sequential minimal optimization.

The dual problem is

    max_c  sum(c) - 1/2 sum_ij y_i y_j c_i c_j K_ij
    s.t.   sum(c * y) = 0,   0 <= c_i <= C = 1 / (2 N lambda)

where ``K`` is the expected-RBF Gram matrix. Internally the solver works on
the equivalent minimization ``1/2 c^T Q c - sum(c)`` with ``Q = (y y^T) * K``.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyDataset
from .kernel import GaussianPoint, KernelParams, cross_kernel, gram_from_roots, stack_points

log = logging.getLogger(__name__)

SINGLE_CLASS = "SingleClass"
MAX_ITERATIONS = "MaxIterations"
NO_FREE_SV = "NoFreeSV"

TAU = 1e-12


@dataclass(frozen=True)
class SolverParams:
    """Regularization and stopping controls.

    ``max_iter`` caps the total number of pair updates (default ``10 N^2``);
    ``stall_iter`` stops early once that many consecutive updates fail to
    raise the dual objective (default ``200 N``). Both are flagged as
    ``MaxIterations``.
    """

    lam: float = 0.001
    kkt_tol: float = 1e-6
    max_iter: int | None = None
    stall_iter: int | None = None
    margin_eps: float = 1e-8
    prune_rel: float = 1e-10

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be positive")

    def box(self, n):
        return 1.0 / (2.0 * n * self.lam)


@dataclass(frozen=True)
class SolveResult:
    coefficients: np.ndarray
    dual_objective: float
    iterations: int
    kkt_gap: float
    flags: frozenset = frozenset()


def dual_objective(coef, labels, gram):
    yc = coef * labels
    return float(np.sum(coef) - 0.5 * yc @ gram @ yc)


def _violating_pair(alpha, y, grad, C):
    """Maximal violating pair (first index on ties) and the KKT gap ``m - M``."""
    score = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    s_up = np.where(up, score, -np.inf)
    s_low = np.where(low, score, np.inf)
    i = int(np.argmax(s_up))
    j = int(np.argmin(s_low))
    return i, j, float(s_up[i] - s_low[j])


def smo_solve(labels, gram, C, kkt_tol=1e-6, max_iter=None, stall_iter=None, debug=False):
    """Solve the box-constrained dual with maximal-violating-pair SMO.

    Parameters
    ----------
    labels : array_like of {-1, +1}, shape (N,)
    gram : ndarray, shape (N, N)
        Symmetric PSD kernel matrix.
    C : float
        Upper bound on each coefficient.
    kkt_tol : float
        Stop once the maximal KKT violation ``m - M`` is below this.
    max_iter, stall_iter : int, optional
        Update caps; see :class:`SolverParams`.
    debug : bool
        Assert that every pair update does not decrease the dual objective.

    Returns
    -------
    SolveResult
    """
    y = np.asarray(labels, dtype=float)
    K = np.asarray(gram, dtype=float)
    N = y.shape[0]
    if N == 0:
        raise EmptyDataset("no training points")
    if K.shape != (N, N):
        raise DimensionMismatch(f"gram of shape {K.shape} for {N} labels")
    if max_iter is None:
        max_iter = 10 * N * N
    if stall_iter is None:
        stall_iter = 200 * N

    alpha = np.zeros(N)
    if np.all(y == y[0]):
        warnings.warn("all labels identical; the equality constraint forces zero coefficients", stacklevel=2)
        return SolveResult(alpha, 0.0, 0, 0.0, frozenset({SINGLE_CLASS}))

    Q = (y[:, None] * y[None, :]) * K
    grad = -np.ones(N)
    best = prev_obj = 0.0
    since_best = 0
    it = 0
    flags = set()
    i, j, gap = _violating_pair(alpha, y, grad, C)
    while gap >= kkt_tol:
        if it >= max_iter or since_best >= stall_iter:
            flags.add(MAX_ITERATIONS)
            log.warning("SMO stopped after %d updates with KKT gap %.3e", it, gap)
            break
        # move along c_i += y_i t, c_j -= y_j t, which keeps sum(c * y) fixed
        curv = K[i, i] + K[j, j] - 2.0 * K[i, j]
        t = gap / max(curv, TAU)
        lim_i = C - alpha[i] if y[i] > 0 else alpha[i]
        lim_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min(t, lim_i, lim_j)
        old_i, old_j = alpha[i], alpha[j]
        if t == lim_i:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] = old_i + y[i] * t
        if t == lim_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] = old_j - y[j] * t
        grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
        it += 1

        obj = -0.5 * float(alpha @ (grad - 1.0))
        if debug:
            assert obj >= prev_obj - 1e-12 * max(1.0, abs(prev_obj)), (it, obj, prev_obj)
            prev_obj = obj
        if obj > best:
            best = obj
            since_best = 0
        else:
            since_best += 1
        i, j, gap = _violating_pair(alpha, y, grad, C)

    obj = -0.5 * float(alpha @ (grad - 1.0))
    return SolveResult(alpha, obj, it, max(gap, 0.0), frozenset(flags))


def compute_bias(labels, coefficients, gram, C, margin_eps=1e-8):
    """Offset ``b`` of the decision score ``sum_i c_i y_i K(i, .) - b``.

    Each free support vector ``j`` (``margin_eps*C < c_j < (1-margin_eps)*C``)
    gives ``b = sum_i c_i y_i K_ij - y_j``; the values are averaged. Without
    free support vectors, ``b`` is the midpoint of the interval allowed by the
    KKT conditions of the bound vectors.

    Returns
    -------
    tuple
        ``(b, used_fallback)``.
    """
    y = np.asarray(labels, dtype=float)
    c = np.asarray(coefficients, dtype=float)
    f = gram @ (c * y)
    r = f - y
    free = (c > margin_eps * C) & (c < (1.0 - margin_eps) * C)
    if free.any():
        return float(np.mean(r[free])), False

    at_zero = c <= margin_eps * C
    at_top = ~at_zero
    upper = (at_zero & (y > 0)) | (at_top & (y < 0))
    lower = (at_zero & (y < 0)) | (at_top & (y > 0))
    ub = np.min(r[upper]) if upper.any() else None
    lb = np.max(r[lower]) if lower.any() else None
    if ub is None and lb is None:
        return 0.0, True
    if ub is None:
        return float(lb), True
    if lb is None:
        return float(ub), True
    return float(0.5 * (lb + ub)), True


@dataclass(frozen=True)
class Diagnostics:
    iterations: int = 0
    dual_objective: float = 0.0
    kkt_gap: float = 0.0
    n_support: int = 0
    n_train: int = 0
    equality_residual: float = 0.0
    flags: tuple = ()


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Support Gaussian points with their labels, dual coefficients and offset."""

    support_points: tuple
    support_labels: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel_params: KernelParams
    solver_params: SolverParams
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    dim: int | None = None

    def __post_init__(self):
        labels = np.array(self.support_labels, dtype=np.int64).reshape(-1)
        coef = np.array(self.coefficients, dtype=float).reshape(-1)
        points = tuple(self.support_points)
        if not (len(points) == labels.size == coef.size):
            raise ValueError("support points, labels and coefficients differ in length")
        labels.flags.writeable = False
        coef.flags.writeable = False
        object.__setattr__(self, "support_points", points)
        object.__setattr__(self, "support_labels", labels)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "bias", float(self.bias))
        if points:
            means, roots = stack_points(points)
            if self.dim is not None and self.dim != means.shape[1]:
                raise DimensionMismatch(f"support points have dimension {means.shape[1]}, not {self.dim}")
            object.__setattr__(self, "dim", means.shape[1])
        else:
            means, roots = None, None
            if self.dim is None:
                raise ValueError("a model without support vectors needs an explicit dim")
        object.__setattr__(self, "_means", means)
        object.__setattr__(self, "_roots", roots)
        object.__setattr__(self, "_weights", coef * labels)

    @property
    def flags(self):
        return self.diagnostics.flags


def decision_scores(model, query_means, query_cov):
    """Scores of several queries sharing one covariance.

    Each row is computed independently of the others, so a score does not
    depend on which other queries were evaluated alongside it.
    """
    qm = np.atleast_2d(np.asarray(query_means, dtype=float))
    q = GaussianPoint(np.zeros(qm.shape[1]), query_cov)
    if qm.shape[1] != model.dim:
        raise DimensionMismatch(f"query dimension {qm.shape[1]} vs model dimension {model.dim}")
    if model._means is None:
        return np.full(qm.shape[0], -model.bias)
    K = cross_kernel(model._means, model._roots, qm, q.cov_sqrt, model.kernel_params.sigma)
    return np.sum(K * model._weights, axis=1) - model.bias


def decision_score(model, query):
    """Pre-sign score ``sum_i c_i y_i kappa(p_i, query) - b`` of one Gaussian point."""
    return float(decision_scores(model, query.mean[None, :], query.cov)[0])


def classify(score):
    """Sign of a score, mapping exactly zero to +1."""
    return np.where(np.asarray(score) >= 0, 1, -1)


def train(dataset, kp=KernelParams(), sp=SolverParams(), debug=False):
    """Fit the dual on ``dataset`` and keep the points with non-negligible coefficients."""
    if dataset is None or len(dataset) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    N = len(dataset)
    C = sp.box(N)
    means, roots = stack_points(dataset.points)
    gram = gram_from_roots(means, roots, kp.sigma)
    labels = dataset.labels
    res = smo_solve(labels, gram, C, sp.kkt_tol, sp.max_iter, sp.stall_iter, debug=debug)
    flags = set(res.flags)
    if SINGLE_CLASS in flags:
        # with every c_i = 0 the score is -b; pick b so the lone class is predicted
        bias = -float(labels[0])
    else:
        bias, fallback = compute_bias(labels, res.coefficients, gram, C, sp.margin_eps)
        if fallback:
            flags.add(NO_FREE_SV)
    keep = res.coefficients > sp.prune_rel * C
    diag = Diagnostics(
        iterations=res.iterations,
        dual_objective=res.dual_objective,
        kkt_gap=res.kkt_gap,
        n_support=int(keep.sum()),
        n_train=N,
        equality_residual=float(abs(np.sum(res.coefficients * labels))),
        flags=tuple(sorted(flags)),
    )
    model = TrainedModel(
        [p for p, k in zip(dataset.points, keep) if k],
        labels[keep],
        res.coefficients[keep],
        bias,
        kp,
        sp,
        diag,
        dataset.dim,
    )
    log.info("trained on %d points: %d support vectors, dual %.6g, flags %s",
             N, diag.n_support, diag.dual_objective, diag.flags)
    return model
