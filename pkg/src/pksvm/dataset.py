"""Labeled Gaussian-point datasets: model, file formats and synthetic generators."""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyDataset, InvalidLabel, NotPSD, ParseError, UnsupportedFormat
from .kernel import GaussianPoint
from .linalg import check_psd

SIGMA_LOW = 0.01 * np.eye(2)
SIGMA_HIGH = 0.09 * np.eye(2)
SIGMA_RED = np.diag([0.09, 0.01])
SIGMA_BLUE = np.diag([0.01, 0.09])
CLUSTER_SIZE = 200
VARIANTS = ("isotropic", "anisotropic")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    points: tuple
    labels: np.ndarray
    name: str = ""
    dim: int = field(init=False)

    def __post_init__(self):
        points = tuple(self.points)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if len(points) == 0:
            raise EmptyDataset("dataset has no points")
        if labels.shape[0] != len(points):
            raise ValueError(f"{len(points)} points but {labels.shape[0]} labels")
        bad = ~np.isin(labels, (-1, 1))
        if np.any(bad):
            raise InvalidLabel(f"labels must be -1 or +1, got {labels[bad][0]}")
        dim = points[0].dim
        if any(p.dim != dim for p in points):
            raise DimensionMismatch("points have differing dimensions")
        labels.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dim", dim)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.labels, other.labels)
            and all(a == b for a, b in zip(self.points, other.points))
        )

    @property
    def means(self):
        return np.stack([p.mean for p in self.points])

    @property
    def covs(self):
        return np.stack([p.cov for p in self.points])


@dataclass(frozen=True)
class GeneratorSpec:
    """One synthetic cluster: a shape, a point count, a shared covariance and a label.

    ``shape`` is ``("disk", radius)`` or ``("annulus", r_inner, r_outer)``.
    """

    shape: tuple
    count: int
    covariance: np.ndarray
    label: int
    seed: object = 0

    def __post_init__(self):
        kind = self.shape[0]
        if kind == "disk":
            if not self.shape[1] > 0:
                raise ValueError("disk radius must be positive")
        elif kind == "annulus":
            r_in, r_out = self.shape[1], self.shape[2]
            if not 0 < r_in < r_out:
                raise ValueError("annulus needs 0 < r_inner < r_outer")
        else:
            raise ValueError(f"unknown shape {kind!r}")
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.label not in (-1, 1):
            raise InvalidLabel(f"label must be -1 or +1, got {self.label}")
        check_psd(self.covariance)

    def sample(self):
        if self.shape[0] == "disk":
            return sample_disk(self.shape[1], self.count, self.seed)
        return sample_annulus(self.shape[1], self.shape[2], self.count, self.seed)


def _polar(radii, rng):
    theta = 2.0 * np.pi * rng.random(radii.shape[0])
    return np.column_stack([radii * np.cos(theta), radii * np.sin(theta)])


def sample_disk(radius, count, seed):
    """Area-uniform samples from the disk of the given radius centered at the origin.

    Radii are drawn as ``radius * sqrt(u)`` and angles uniformly on
    ``[0, 2 pi)`` from a PCG64 stream seeded by ``seed`` (an int or a
    ``numpy.random.SeedSequence``).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    r = radius * np.sqrt(rng.random(count))
    return _polar(r, rng)


def sample_annulus(r_inner, r_outer, count, seed):
    """Area-uniform samples from ``{x : r_inner <= |x| <= r_outer}``."""
    if not 0 < r_inner < r_outer:
        raise ValueError("annulus needs 0 < r_inner < r_outer")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(count)
    r = np.sqrt(r_inner**2 + u * (r_outer**2 - r_inner**2))
    # rounding in sqrt may step outside the closed bounds by an ulp
    r = np.clip(r, r_inner, r_outer)
    return _polar(r, rng)


def generate(specs, name=""):
    points = []
    labels = []
    for spec in specs:
        cov = np.asarray(spec.covariance, dtype=float)
        for x in spec.sample():
            points.append(GaussianPoint(x, cov))
            labels.append(spec.label)
    return LabeledDataset(points, labels, name)


def make_paper_dataset(variant="isotropic", seed=0):
    """The two-cluster disk/annulus dataset.

    200 points uniform on the unit disk (label +1) and 200 on the annulus
    ``1 <= |x| <= 2`` (label -1). The ``isotropic`` variant gives them
    covariances ``0.01 I`` and ``0.09 I``; ``anisotropic`` gives
    ``diag(0.09, 0.01)`` and ``diag(0.01, 0.09)``.
    """
    if variant == "isotropic":
        cov_pos, cov_neg = SIGMA_LOW, SIGMA_HIGH
    elif variant == "anisotropic":
        cov_pos, cov_neg = SIGMA_RED, SIGMA_BLUE
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    seed_pos, seed_neg = np.random.SeedSequence(seed).spawn(2)
    specs = [
        GeneratorSpec(("disk", 1.0), CLUSTER_SIZE, cov_pos, 1, seed_pos),
        GeneratorSpec(("annulus", 1.0, 2.0), CLUSTER_SIZE, cov_neg, -1, seed_neg),
    ]
    return generate(specs, name=f"{variant}-{seed}")


def random_gaussian_points(dim, count, seed, mean_scale=1.0, cov_scale=0.5):
    """Random Gaussian points with standard-normal means and random full covariances.

    Each covariance is ``A A^T`` with ``A`` having i.i.d. ``N(0, cov_scale^2)``
    entries, so it is PSD and generically non-diagonal.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    points = []
    for _ in range(count):
        mean = mean_scale * rng.standard_normal(dim)
        a = cov_scale * rng.standard_normal((dim, dim))
        cov = a @ a.T
        points.append(GaussianPoint(mean, 0.5 * (cov + cov.T)))
    return points


# --- file formats -----------------------------------------------------------


def csv_header(dim, with_label=True):
    cols = [f"x{i}" for i in range(1, dim + 1)]
    cols += [f"cov_{i}{j}" for i in range(1, dim + 1) for j in range(i, dim + 1)]
    if with_label:
        cols.append("label")
    return cols


def _fmt(v):
    return repr(float(v))


def upper_triangle(cov):
    iu = np.triu_indices(cov.shape[0])
    return cov[iu]


def from_upper_triangle(values, dim):
    cov = np.zeros((dim, dim))
    iu = np.triu_indices(dim)
    cov[iu] = values
    cov.T[iu] = values
    return cov


def _parse_label(text, line):
    try:
        value = float(text)
    except ValueError:
        raise InvalidLabel(f"label {text!r} is not a number", line) from None
    if value not in (-1.0, 1.0):
        raise InvalidLabel(f"label must be -1 or +1, got {text!r}", line)
    return int(value)


def _make_point(mean, cov, where):
    try:
        return GaussianPoint(mean, cov)
    except NotPSD as exc:
        raise NotPSD(f"{where}: {exc}") from None


def format_points_csv(points, labels=None):
    dim = points[0].dim
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(dim, labels is not None))
    for k, p in enumerate(points):
        row = [_fmt(v) for v in p.mean] + [_fmt(v) for v in upper_triangle(p.cov)]
        if labels is not None:
            row.append(str(int(labels[k])))
        writer.writerow(row)
    return buf.getvalue()


def parse_points_csv(text, require_label=True):
    """Parse CSV text into ``(points, labels)``; ``labels`` is None when absent and not required."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty file", 1) from None
    dim = sum(1 for h in header if h.startswith("x"))
    has_label = bool(header) and header[-1] == "label"
    if dim < 1 or header not in (csv_header(dim, True), csv_header(dim, False)):
        raise ParseError(f"unexpected header {header}", 1)
    if require_label and not has_label:
        raise ParseError("missing label column", 1)
    n_cov = dim * (dim + 1) // 2
    width = len(header)
    points, labels = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise DimensionMismatch(f"line {line}: expected {width} fields, got {len(row)}")
        try:
            values = [float(c) for c in row[: dim + n_cov]]
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite value", line)
        mean = values[:dim]
        cov = from_upper_triangle(values[dim:], dim)
        points.append(_make_point(mean, cov, f"line {line}"))
        if has_label:
            labels.append(_parse_label(row[-1].strip(), line))
    if not points:
        raise EmptyDataset("file contains no data rows")
    return points, (labels if has_label else None)


def format_points_json(points, labels=None):
    records = []
    for k, p in enumerate(points):
        rec = {"mean": p.mean.tolist(), "cov": p.cov.tolist()}
        if labels is not None:
            rec["label"] = int(labels[k])
        records.append(rec)
    return json.dumps(records, indent=1) + "\n"


def parse_points_json(text, require_label=True):
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(records, list):
        raise ParseError("expected a JSON array of records")
    if not records:
        raise EmptyDataset("file contains no records")
    points, labels = [], []
    for k, rec in enumerate(records):
        try:
            mean = np.asarray(rec["mean"], dtype=float)
            cov = np.asarray(rec["cov"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"record {k}: {exc}") from None
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"record {k}: covariance shape {cov.shape} for mean of length {mean.size}")
        points.append(_make_point(mean, cov, f"record {k}"))
        if "label" in rec:
            try:
                labels.append(_parse_label(str(rec["label"]), None))
            except InvalidLabel as exc:
                raise InvalidLabel(f"record {k}: {exc}") from None
        elif require_label:
            raise ParseError(f"record {k}: missing label")
    if labels and len(labels) != len(points):
        raise ParseError("labels present on some records only")
    return points, (labels or None)


def _format_of(path):
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix in (".csv", ""):
        return "csv"
    raise UnsupportedFormat(f"unrecognized extension {suffix!r}")


def atomic_write_text(path, text):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_dataset(dataset, path):
    fmt = _format_of(path)
    if fmt == "json":
        text = format_points_json(dataset.points, dataset.labels)
    else:
        text = format_points_csv(dataset.points, dataset.labels)
    atomic_write_text(path, text)


def read_points(path, require_label=False):
    with open(path, newline="") as fh:
        text = fh.read()
    if _format_of(path) == "json":
        return parse_points_json(text, require_label)
    return parse_points_csv(text, require_label)


def read_dataset(path):
    points, labels = read_points(path, require_label=True)
    return LabeledDataset(points, labels, name=Path(path).stem)
