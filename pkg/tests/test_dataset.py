import numpy as np
import pytest
from scipy import stats

from pksvm.dataset import (
    SIGMA_BLUE,
    SIGMA_HIGH,
    SIGMA_LOW,
    SIGMA_RED,
    GeneratorSpec,
    LabeledDataset,
    generate,
    make_paper_dataset,
    random_gaussian_points,
    read_dataset,
    read_points,
    sample_annulus,
    sample_disk,
    write_dataset,
)
from pksvm.errors import DimensionMismatch, EmptyDataset, InvalidLabel, NotPSD, ParseError


def test_disk_bounds_and_determinism():
    a = sample_disk(1.5, 1000, seed=3)
    assert a.shape == (1000, 2)
    assert np.all(np.linalg.norm(a, axis=1) <= 1.5)
    np.testing.assert_array_equal(a, sample_disk(1.5, 1000, seed=3))
    assert not np.array_equal(a, sample_disk(1.5, 1000, seed=4))


def test_annulus_bounds_and_determinism():
    a = sample_annulus(1.0, 2.0, 1000, seed=3)
    r = np.linalg.norm(a, axis=1)
    assert np.all((r >= 1.0 - 1e-15) & (r <= 2.0 + 1e-15))
    np.testing.assert_array_equal(a, sample_annulus(1.0, 2.0, 1000, seed=3))


def test_disk_mean_radius():
    r = np.linalg.norm(sample_disk(1.0, 100_000, seed=0), axis=1)
    se = r.std(ddof=1) / np.sqrt(r.size)
    assert abs(r.mean() - 2.0 / 3.0) <= 3 * se


def test_annulus_mean_radius():
    r = np.linalg.norm(sample_annulus(1.0, 2.0, 100_000, seed=0), axis=1)
    se = r.std(ddof=1) / np.sqrt(r.size)
    assert abs(r.mean() - 14.0 / 9.0) <= 3 * se


def test_disk_area_uniform_ks():
    r2 = np.sum(sample_disk(2.0, 10_000, seed=1) ** 2, axis=1) / 4.0
    assert stats.kstest(r2, "uniform").pvalue > 0.001


def test_annulus_area_uniform_ks():
    r2 = np.sum(sample_annulus(1.0, 2.0, 10_000, seed=1) ** 2, axis=1)
    assert stats.kstest((r2 - 1.0) / 3.0, "uniform").pvalue > 0.001


def test_angles_uniform_ks():
    a = sample_disk(1.0, 10_000, seed=2)
    theta = np.mod(np.arctan2(a[:, 1], a[:, 0]), 2 * np.pi) / (2 * np.pi)
    assert stats.kstest(theta, "uniform").pvalue > 0.001


@pytest.mark.parametrize("bad", [(0.0,), (-1.0,)])
def test_disk_rejects_bad_radius(bad):
    with pytest.raises(ValueError):
        sample_disk(bad[0], 10, 0)


def test_annulus_rejects_bad_radii():
    with pytest.raises(ValueError):
        sample_annulus(2.0, 1.0, 10, 0)


def test_generator_spec_validation():
    with pytest.raises(NotPSD):
        GeneratorSpec(("disk", 1.0), 5, np.array([[1.0, 2.0], [2.0, 1.0]]), 1)
    with pytest.raises(InvalidLabel):
        GeneratorSpec(("disk", 1.0), 5, np.eye(2), 0)
    with pytest.raises(ValueError):
        GeneratorSpec(("annulus", 2.0, 1.0), 5, np.eye(2), 1)


def test_generate_from_specs():
    ds = generate([GeneratorSpec(("disk", 0.5), 7, 0.2 * np.eye(2), -1, seed=1)])
    assert len(ds) == 7 and set(ds.labels) == {-1}
    assert np.all(np.linalg.norm(ds.means, axis=1) <= 0.5)


def test_disk_annulus_isotropic():
    ds = make_paper_dataset("isotropic", 7)
    assert len(ds) == 400 and ds.dim == 2
    pos = [p for p, y in zip(ds.points, ds.labels) if y == 1]
    neg = [p for p, y in zip(ds.points, ds.labels) if y == -1]
    assert len(pos) == 200 and len(neg) == 200
    assert all(np.array_equal(p.cov, SIGMA_LOW) for p in pos)
    assert all(np.array_equal(p.cov, SIGMA_HIGH) for p in neg)
    assert all(np.linalg.norm(p.mean) <= 1.0 for p in pos)
    r = np.array([np.linalg.norm(p.mean) for p in neg])
    assert np.all((r >= 1.0 - 1e-15) & (r <= 2.0 + 1e-15))


def test_disk_annulus_anisotropic():
    ds = make_paper_dataset("anisotropic", 7)
    for p, y in zip(ds.points, ds.labels):
        np.testing.assert_array_equal(p.cov, SIGMA_RED if y == 1 else SIGMA_BLUE)
    np.testing.assert_array_equal(ds.means, make_paper_dataset("isotropic", 7).means)


def test_disk_annulus_unknown_variant():
    with pytest.raises(ValueError):
        make_paper_dataset("spherical", 0)


def test_dataset_invariants():
    with pytest.raises(EmptyDataset):
        LabeledDataset([], [])
    pts = random_gaussian_points(2, 3, 0)
    with pytest.raises(InvalidLabel):
        LabeledDataset(pts, [1, 0, -1])
    with pytest.raises(ValueError):
        LabeledDataset(pts, [1, -1])


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_round_trip_disk_annulus(tmp_path, suffix):
    ds = make_paper_dataset("isotropic", 7)
    path = tmp_path / f"z{suffix}"
    write_dataset(ds, path)
    assert read_dataset(path) == ds


@pytest.mark.parametrize("suffix", [".csv", ".json"])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_round_trip_full_covariances(tmp_path, suffix, dim):
    pts = random_gaussian_points(dim, 25, seed=dim)
    labels = np.where(np.arange(25) % 3 == 0, 1, -1)
    ds = LabeledDataset(pts, labels)
    path = tmp_path / f"d{suffix}"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back == ds
    assert any(p.cov[0, -1] != 0 for p in back.points) or dim == 1


def test_csv_header_layout(tmp_path):
    path = tmp_path / "d.csv"
    write_dataset(LabeledDataset(random_gaussian_points(3, 1, 0), [1]), path)
    assert path.read_text().splitlines()[0] == "x1,x2,x3,cov_11,cov_12,cov_13,cov_22,cov_23,cov_33,label"


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


HEADER = "x1,x2,cov_11,cov_12,cov_22,label\n"


def test_invalid_label(tmp_path):
    p = _write(tmp_path, HEADER + "0,0,1,0,1,1\n0,0,1,0,1,0\n")
    with pytest.raises(InvalidLabel) as exc:
        read_dataset(p)
    assert exc.value.line == 3


def test_not_psd_row(tmp_path):
    p = _write(tmp_path, HEADER + "0,0,1,2,1,1\n")
    with pytest.raises(NotPSD, match="line 2"):
        read_dataset(p)


def test_parse_error_with_line(tmp_path):
    p = _write(tmp_path, HEADER + "0,0,1,0,1,1\n0,abc,1,0,1,-1\n")
    with pytest.raises(ParseError) as exc:
        read_dataset(p)
    assert exc.value.line == 3


def test_wrong_field_count(tmp_path):
    p = _write(tmp_path, HEADER + "0,0,1,0,1\n")
    with pytest.raises(DimensionMismatch, match="line 2"):
        read_dataset(p)


def test_bad_header(tmp_path):
    p = _write(tmp_path, "a,b,c\n1,2,3\n")
    with pytest.raises(ParseError):
        read_dataset(p)


def test_query_file_without_labels(tmp_path):
    p = _write(tmp_path, "x1,x2,cov_11,cov_12,cov_22\n0.5,0.5,0.01,0,0.01\n")
    points, labels = read_points(p)
    assert labels is None and len(points) == 1
    with pytest.raises(ParseError):
        read_dataset(p)


def test_json_invalid_label(tmp_path):
    p = _write(tmp_path, '[{"mean": [0], "cov": [[1]], "label": 0}]', "d.json")
    with pytest.raises(InvalidLabel, match="record 0"):
        read_dataset(p)
