import gzip
import math
import struct

import numpy as np
import pytest

from nclab import data, densemat, metrics


# ---------------------------------------------------------------------------
# one-hot labels
# ---------------------------------------------------------------------------

def test_one_hot_basic():
    y = data.one_hot([0, 2, 1, 2], 3)
    expected = np.array([[1, 0, 0, 0],
                         [0, 0, 1, 0],
                         [0, 1, 0, 1]], dtype=float)
    np.testing.assert_array_equal(y, expected)


def test_one_hot_rejects_out_of_range():
    with pytest.raises(ValueError):
        data.one_hot([0, 3], 3)
    with pytest.raises(ValueError):
        data.one_hot([-1], 3)


def test_one_hot_singular_values():
    # balanced one-hot Y has Y Y^T = n I, so every singular value is sqrt(n)
    for k, n_per in [(2, 5), (4, 3), (10, 7)]:
        labels = np.repeat(np.arange(k), n_per)
        y = data.one_hot(labels, k)
        s = np.linalg.svd(y, compute_uv=False)
        np.testing.assert_allclose(s, math.sqrt(n_per), atol=1e-12)


# ---------------------------------------------------------------------------
# synthetic Gaussians
# ---------------------------------------------------------------------------

def test_synth_deterministic_and_shapes():
    d1 = data.synth_gaussian(d=6, k=3, n_per_class=4, class_sep=2.0,
                             noise=0.5, seed=9)
    d2 = data.synth_gaussian(d=6, k=3, n_per_class=4, class_sep=2.0,
                             noise=0.5, seed=9)
    np.testing.assert_array_equal(d1.x, d2.x)
    np.testing.assert_array_equal(d1.y, d2.y)
    assert d1.x.shape == (6, 12)
    assert d1.y.shape == (3, 12)
    assert d1.idx.class_counts == (4, 4, 4)
    assert d1.b == pytest.approx(float(np.linalg.norm(d1.x, axis=0).max()))


def test_synth_zero_noise_collapses_to_orthonormal_centers():
    ds = data.synth_gaussian(d=5, k=3, n_per_class=4, class_sep=2.0,
                             noise=0.0, seed=1)
    means, _ = metrics.class_means(ds.x, ds.idx)
    # all samples sit on their class center
    for c, sl in enumerate(ds.idx.slices()):
        np.testing.assert_allclose(
            ds.x[:, sl], np.tile(means[:, [c]], (1, 4)), atol=1e-12)
    # centers are class_sep * orthonormal directions
    np.testing.assert_allclose(means.T @ means, 4.0 * np.eye(3), atol=1e-10)
    assert metrics.nc1(ds.x, ds.idx) == 0.0


def test_synth_min_col_norm_one_rescaling():
    ds = data.synth_gaussian(d=8, k=2, n_per_class=3, class_sep=0.05,
                             noise=0.01, seed=2, min_col_norm_one=True)
    assert ds.b == 1.0
    assert float(np.linalg.norm(ds.x, axis=0).max()) == pytest.approx(1.0)
    big = data.synth_gaussian(d=8, k=2, n_per_class=3, class_sep=5.0,
                              noise=0.01, seed=2, min_col_norm_one=True)
    assert big.b > 1.0  # no rescaling when the norms already exceed one


def test_synth_validation():
    with pytest.raises(ValueError):
        data.synth_gaussian(d=2, k=3, n_per_class=2, class_sep=1.0,
                            noise=0.1, seed=0)
    with pytest.raises(ValueError):
        data.synth_gaussian(d=4, k=2, n_per_class=0, class_sep=1.0,
                            noise=0.1, seed=0)


# ---------------------------------------------------------------------------
# IDX loader
# ---------------------------------------------------------------------------

def write_idx_images(path, images):
    images = np.asarray(images, dtype=np.uint8)
    n, r, c = images.shape
    path.write_bytes(struct.pack(">IIII", data.IDX_MAGIC_IMAGES, n, r, c)
                     + images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    path.write_bytes(struct.pack(">II", data.IDX_MAGIC_LABELS, labels.size)
                     + labels.tobytes())


def reference_parse_images(path):
    # independent minimal parser for cross-checking
    raw = path.read_bytes()
    magic, n, r, c = struct.unpack(">IIII", raw[:16])
    assert magic == 0x00000803
    return np.array(list(raw[16:]), dtype=np.uint8).reshape(n, r, c)


@pytest.fixture
def idx_pair(tmp_path):
    rng = np.random.default_rng(3)
    images = rng.integers(0, 256, size=(10, 3, 2), dtype=np.uint8)
    labels = np.array([0, 1, 0, 2, 1, 2, 0, 1, 2, 0], dtype=np.uint8)
    ip, lp = tmp_path / "imgs.idx", tmp_path / "labs.idx"
    write_idx_images(ip, images)
    write_idx_labels(lp, labels)
    return ip, lp, images, labels


def test_read_idx_round_trip(idx_pair):
    ip, lp, images, labels = idx_pair
    np.testing.assert_array_equal(data.read_idx_images(ip), images)
    np.testing.assert_array_equal(data.read_idx_labels(lp), labels)
    np.testing.assert_array_equal(data.read_idx_images(ip),
                                  reference_parse_images(ip))


def test_read_idx_gzip(tmp_path, idx_pair):
    ip, lp, images, labels = idx_pair
    gp = tmp_path / "imgs.idx.gz"
    gp.write_bytes(gzip.compress(ip.read_bytes()))
    np.testing.assert_array_equal(data.read_idx_images(gp), images)


def test_idx_error_cases(tmp_path, idx_pair):
    ip, lp, images, labels = idx_pair
    bad_magic = tmp_path / "bad_magic.idx"
    bad_magic.write_bytes(struct.pack(">IIII", 0xDEADBEEF, 1, 1, 1) + b"\x00")
    with pytest.raises(data.IdxFormatError, match="magic"):
        data.read_idx_images(bad_magic)
    truncated = tmp_path / "trunc.idx"
    truncated.write_bytes(ip.read_bytes()[:-3])
    with pytest.raises(data.IdxFormatError, match="truncated"):
        data.read_idx_images(truncated)
    trailing = tmp_path / "trail.idx"
    trailing.write_bytes(ip.read_bytes() + b"\x00")
    with pytest.raises(data.IdxFormatError, match="trailing"):
        data.read_idx_images(trailing)
    short_labels = tmp_path / "short_labs.idx"
    write_idx_labels(short_labels, labels[:4])
    with pytest.raises(data.IdxFormatError, match="count"):
        data.load_idx(ip, short_labels)


def test_load_idx_groups_by_class(idx_pair):
    ip, lp, images, labels = idx_pair
    ds = data.load_idx(ip, lp)
    assert ds.x.shape == (6, 10)
    assert ds.idx.class_counts == (4, 3, 3)
    # columns are the flattened images regrouped by class, scaled to [0,1]
    order = np.argsort(labels, kind="stable")
    expected = images.reshape(10, -1).T[:, order] / 255.0
    np.testing.assert_allclose(ds.x, expected, atol=1e-15)
    np.testing.assert_array_equal(ds.y, data.one_hot(labels[order], 3))


def test_load_idx_subset_and_classes(idx_pair):
    ip, lp, images, labels = idx_pair
    ds = data.load_idx(ip, lp, subset=2, classes=(2, 0))
    assert ds.idx.class_counts == (2, 2)
    # class 2 is relabeled 0, class 0 relabeled 1; first two in file order
    file_order = {2: [3, 5], 0: [0, 2]}
    expected_cols = file_order[2] + file_order[0]
    expected = images.reshape(10, -1).T[:, expected_cols] / 255.0
    np.testing.assert_allclose(ds.x, expected, atol=1e-15)
    with pytest.raises(ValueError, match="not enough"):
        data.load_idx(ip, lp, subset=5)


def test_dataset_validation():
    x = np.zeros((2, 3))
    y = data.one_hot([0, 0, 1], 2)
    with pytest.raises(ValueError):
        data.Dataset(x=x, y=y, idx=metrics.ClassIndex((1, 1)), b=0.0)
    bad_y = y.copy()
    bad_y[0, 0] = 0.5
    with pytest.raises(ValueError):
        data.Dataset(x=x, y=bad_y, idx=metrics.ClassIndex((2, 1)), b=0.0)
