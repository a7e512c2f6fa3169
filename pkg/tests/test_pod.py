import numpy as np
import pytest

from baryrom import (
    InnerProduct,
    RankTooSmallError,
    ShapeMismatchError,
    SnapshotMatrix,
    compute_pod,
    energy_fraction,
    global_mean,
)


def snaps(values, param=0.1):
    values = np.asarray(values, dtype=float)
    return SnapshotMatrix(values=values, times=np.arange(values.shape[1], dtype=float),
                          param=param)


def pod_spectrum_oracle(values, ip):
    """Squared singular values of the weight-scaled snapshot matrix."""
    w = ip.weight if np.ndim(ip.weight) else np.full(values.shape[0], ip.weight)
    scaled = np.sqrt(w)[:, None] * values
    s = np.linalg.svd(scaled, compute_uv=False)
    return s**2


# ------------------------------------------------------------ inner product

def test_inner_product_scalar_and_vector():
    ip = InnerProduct(0.5)
    assert ip.dot([1.0, 2.0], [3.0, 4.0]) == pytest.approx(0.5 * 11.0)
    ipv = InnerProduct([1.0, 2.0])
    assert ipv.dot([1.0, 2.0], [3.0, 4.0]) == pytest.approx(3.0 + 16.0)
    assert ipv.norm([1.0, 1.0]) == pytest.approx(np.sqrt(3.0))


def test_inner_product_rejects_nonpositive():
    with pytest.raises(ValueError):
        InnerProduct(0.0)
    with pytest.raises(ValueError):
        InnerProduct([1.0, -1.0])


# -------------------------------------------------------------- global mean

def test_global_mean_identical_columns():
    c = np.array([2.0, -1.0, 3.0])
    s = snaps(np.column_stack([c, c, c]))
    np.testing.assert_array_equal(global_mean([s]), c)


def test_global_mean_hand_example():
    s1 = snaps(np.array([[1.0, 3.0], [1.0, 3.0]]))
    s2 = snaps(np.array([[0.0, 4.0], [0.0, 4.0]]))
    np.testing.assert_allclose(global_mean([s1, s2]), [2.0, 2.0])


def test_global_mean_centering_identity(rng):
    sets = [snaps(rng.standard_normal((12, 5))) for _ in range(3)]
    mean = global_mean(sets)
    fluct = [s.values - mean[:, None] for s in sets]
    np.testing.assert_allclose(sum(f.sum(axis=1) for f in fluct) / 15.0, 0.0,
                               atol=1e-12)


def test_global_mean_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        global_mean([snaps(np.ones((4, 2))), snaps(np.ones((5, 2)))])
    with pytest.raises(ShapeMismatchError):
        global_mean([snaps(np.ones((4, 2))), snaps(np.ones((4, 3)))])


# --------------------------------------------------------------------- pod

def test_pod_axis_snapshots():
    u = np.zeros((3, 2))
    u[0, 0] = 2.0  # 2*e1
    u[1, 1] = 1.0  # e2
    basis = compute_pod(snaps(u), InnerProduct(1.0), q=2)
    np.testing.assert_allclose(basis.eigenvalues, [4.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(basis.modes[:, 0], [1.0, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(basis.modes[:, 1], [0.0, 1.0, 0.0], atol=1e-14)


def test_pod_rank_one_snapshots(rng):
    v = rng.standard_normal(20)
    coeffs = np.array([1.0, -2.0, 0.5])
    u = np.outer(v, coeffs)
    ip = InnerProduct(0.25)
    basis = compute_pod(snaps(u), ip, q=1)
    vnorm = ip.norm(v)
    lam = float(np.sum(coeffs**2)) * vnorm**2
    assert basis.eigenvalues[0] == pytest.approx(lam, rel=1e-12)
    np.testing.assert_allclose(basis.eigenvalues[1:], 0.0, atol=1e-10 * lam)
    mode = basis.modes[:, 0]
    unit = v / vnorm
    if np.dot(mode, unit) < 0:
        unit = -unit
    np.testing.assert_allclose(mode, unit, atol=1e-12)


def test_pod_full_rank_reproduces_snapshots(rng):
    u = rng.standard_normal((40, 6))
    ip = InnerProduct(0.1)
    basis = compute_pod(snaps(u), ip, q=6)
    proj = basis.modes @ (basis.modes.T @ ip.apply(u))
    assert np.linalg.norm(u - proj) < 1e-10
    np.testing.assert_allclose(pod_spectrum_oracle(u, ip)[:6],
                               basis.eigenvalues[:6], rtol=1e-10)


def test_pod_weighted_orthonormality(rng):
    ip = InnerProduct(rng.uniform(0.5, 2.0, size=30))
    u = rng.standard_normal((30, 8))
    basis = compute_pod(snaps(u), ip, q=5)
    gram = basis.modes.T @ ip.apply(basis.modes)
    assert np.max(np.abs(gram - np.eye(5))) < 1e-10


def test_pod_spectrum_matches_svd_oracle(rng):
    ip = InnerProduct(0.37)
    u = rng.standard_normal((50, 7))
    basis = compute_pod(snaps(u), ip, q=3)
    np.testing.assert_allclose(basis.eigenvalues, pod_spectrum_oracle(u, ip),
                               rtol=1e-10)


def test_pod_residual_energy_is_tail_sum(rng):
    ip = InnerProduct(0.2)
    u = rng.standard_normal((25, 6))
    for q in range(1, 6):
        basis = compute_pod(snaps(u), ip, q=q)
        resid = u - basis.modes @ (basis.modes.T @ ip.apply(u))
        energy = float(np.sum(ip.apply(resid) * resid))
        tail = float(basis.eigenvalues[q:].sum())
        assert energy == pytest.approx(tail, rel=1e-10, abs=1e-12)


def test_pod_rank_too_small():
    u = np.outer(np.arange(1.0, 9.0), [1.0, 2.0, 3.0])  # rank one
    with pytest.raises(RankTooSmallError):
        compute_pod(snaps(u), InnerProduct(1.0), q=2)


def test_pod_sign_convention(rng):
    u = rng.standard_normal((15, 4))
    basis = compute_pod(snaps(u), InnerProduct(1.0), q=4)
    for k in range(4):
        col = basis.modes[:, k]
        assert col[np.argmax(np.abs(col))] > 0


# --------------------------------------------------------- energy fraction

def test_energy_fraction_values():
    from baryrom.pod import PODBasis

    basis = PODBasis(modes=np.zeros((3, 2)), eigenvalues=np.array([4.0, 1.0]),
                     param=0.0)
    assert energy_fraction(basis, 2) == pytest.approx(1.0)
    assert energy_fraction(basis, 1) == pytest.approx(0.8)
    degenerate = PODBasis(modes=np.zeros((3, 1)),
                          eigenvalues=np.array([5.0, 0.0, 0.0]), param=0.0)
    assert energy_fraction(degenerate, 1) == pytest.approx(1.0)
