"""Score grids, radial boundary probes and training accuracy."""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoCrossings
from .solver import classify, decision_scores

DEFAULT_RANGE = (-2.0, 2.0)
DEFAULT_RESOLUTION = 200
CONTOUR_LEVELS = (-0.5, 0.0, 0.5)
PROBE_RAYS = 64
PROBE_R_MIN = 0.2
PROBE_R_MAX = 2.0
PROBE_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ScoreGrid:
    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    test_cov: np.ndarray
    scores: np.ndarray  # shape (nx, ny); scores[i, j] at (xs[i], ys[j])

    @property
    def xs(self):
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    @property
    def ys(self):
        return np.linspace(self.y_range[0], self.y_range[1], self.ny)

    def to_csv(self):
        """``x,y,score`` rows with y varying fastest."""
        lines = ["x,y,score"]
        xs, ys, scores = self.xs.tolist(), self.ys.tolist(), self.scores.tolist()
        for i in range(self.nx):
            for j in range(self.ny):
                lines.append(f"{xs[i]!r},{ys[j]!r},{scores[i][j]!r}")
        return "\n".join(lines) + "\n"

    def level_fractions(self, levels=CONTOUR_LEVELS):
        """Fraction of grid cells whose score is at or above each level."""
        return {lvl: float(np.mean(self.scores >= lvl)) for lvl in levels}


def _check_2d(model):
    if model.dim != 2:
        raise DimensionMismatch(f"expected a 2-D model, got dimension {model.dim}")


def _check_range(r, name):
    lo, hi = float(r[0]), float(r[1])
    if not lo < hi:
        raise ValueError(f"{name} must satisfy min < max, got {r}")
    return lo, hi


def score_grid(model, test_cov, x_range=DEFAULT_RANGE, y_range=DEFAULT_RANGE,
               nx=DEFAULT_RESOLUTION, ny=DEFAULT_RESOLUTION):
    """Decision scores of ``(p, test_cov)`` for every lattice point ``p`` of a rectangle."""
    _check_2d(model)
    x_range = _check_range(x_range, "x_range")
    y_range = _check_range(y_range, "y_range")
    if nx < 1 or ny < 1:
        raise ValueError("grid resolution must be positive")
    xs = np.linspace(*x_range, nx)
    ys = np.linspace(*y_range, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    scores = np.empty(pts.shape[0])
    # chunked to bound memory of the (queries x supports x 2 x 2) intermediates
    step = 256
    for k in range(0, pts.shape[0], step):
        scores[k:k + step] = decision_scores(model, pts[k:k + step], test_cov)
    scores = scores.reshape(nx, ny)
    return ScoreGrid(x_range, y_range, nx, ny, np.asarray(test_cov, dtype=float), scores)


def _ray_score(model, test_cov, center, direction, r):
    return float(decision_scores(model, (center + r * direction)[None, :], test_cov)[0])


def radial_crossing(model, test_cov, center=(0.0, 0.0), angle=0.0, r_min=PROBE_R_MIN,
                    r_max=PROBE_R_MAX, tol=PROBE_TOL, level=0.0):
    """Radius along a ray where ``score - level`` changes sign, or None.

    The ray starts at ``center`` with direction ``(cos angle, sin angle)``.
    When the shifted score has opposite signs at ``r_min`` and ``r_max``,
    the bracket is bisected until narrower than ``tol`` and its midpoint
    returned.
    """
    _check_2d(model)
    if not r_min < r_max:
        raise ValueError("r_min must be smaller than r_max")
    center = np.asarray(center, dtype=float)
    u = np.array([math.cos(angle), math.sin(angle)])
    lo, hi = float(r_min), float(r_max)
    f_lo = _ray_score(model, test_cov, center, u, lo) - level
    f_hi = _ray_score(model, test_cov, center, u, hi) - level
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _ray_score(model, test_cov, center, u, mid) - level
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def radial_zero_crossing(model, test_cov, center=(0.0, 0.0), angle=0.0, r_min=PROBE_R_MIN,
                         r_max=PROBE_R_MAX, tol=PROBE_TOL):
    return radial_crossing(model, test_cov, center, angle, r_min, r_max, tol, level=0.0)


@dataclass(frozen=True)
class BoundaryProbe:
    center: tuple
    ray_count: int
    r_min: float
    r_max: float
    angles: tuple
    crossings: tuple  # radius or None per ray

    @property
    def found(self):
        return sum(c is not None for c in self.crossings)

    @property
    def mean(self):
        hits = [c for c in self.crossings if c is not None]
        if not hits:
            raise NoCrossings("no ray crossed the decision boundary")
        return float(np.mean(hits))

    def to_dict(self):
        return {
            "center": list(self.center),
            "ray_count": self.ray_count,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "found": self.found,
            "mean_radius": self.mean if self.found else None,
            "rays": [{"angle": a, "radius": c} for a, c in zip(self.angles, self.crossings)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d):
        rays = d["rays"]
        return cls(tuple(d["center"]), d["ray_count"], d["r_min"], d["r_max"],
                   tuple(r["angle"] for r in rays), tuple(r["radius"] for r in rays))


def probe_boundary(model, test_cov, ray_count=PROBE_RAYS, r_min=PROBE_R_MIN, r_max=PROBE_R_MAX,
                   tol=PROBE_TOL, center=(0.0, 0.0), level=0.0):
    if ray_count < 1:
        raise ValueError("ray_count must be positive")
    angles = tuple(2.0 * math.pi * k / ray_count for k in range(ray_count))
    crossings = tuple(
        radial_crossing(model, test_cov, center, a, r_min, r_max, tol, level) for a in angles
    )
    return BoundaryProbe(tuple(float(c) for c in center), ray_count, float(r_min), float(r_max),
                         angles, crossings)


def mean_boundary_radius(model, test_cov, ray_count=PROBE_RAYS, r_min=PROBE_R_MIN,
                         r_max=PROBE_R_MAX, tol=PROBE_TOL, center=(0.0, 0.0)):
    """Mean zero-crossing radius over equally spaced rays and the number of rays that crossed.

    Raises NoCrossings when no ray crosses.
    """
    probe = probe_boundary(model, test_cov, ray_count, r_min, r_max, tol, center)
    return probe.mean, probe.found


def axis_crossings(model, test_cov, r_min=PROBE_R_MIN, r_max=PROBE_R_MAX, tol=PROBE_TOL):
    """Zero-crossing radii along the four half-axes, keyed ``+x, +y, -x, -y``."""
    names = ("+x", "+y", "-x", "-y")
    return {
        name: radial_zero_crossing(model, test_cov, (0.0, 0.0), k * math.pi / 2, r_min, r_max, tol)
        for k, name in enumerate(names)
    }


def training_accuracy(model, dataset):
    """Fraction of points classified as their label, each scored with its own covariance."""
    correct = 0
    for p, y in zip(dataset.points, dataset.labels):
        s = decision_scores(model, p.mean[None, :], p.cov)[0]
        correct += int(classify(s) == y)
    return correct / len(dataset)


def score_range(grid):
    return float(np.min(grid.scores)), float(np.max(grid.scores))


def point_score(model, x, test_cov):
    """Score of a single 2-D location with the given covariance."""
    return float(decision_scores(model, np.asarray(x, dtype=float)[None, :], test_cov)[0])

