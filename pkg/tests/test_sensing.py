import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrsdcs import sensing
from lrsdcs.sensing import (MeasurementFile, MeasurementFileError, SensingOperator,
                            build_operator, fwht, read_measurements, write_measurements)
from oracles import hadamard_dense, sensing_dense


def test_fwht_small_cases():
    np.testing.assert_allclose(fwht([1, 1, 1, 1]), [2, 0, 0, 0])
    np.testing.assert_allclose(fwht([1, -1]), [0, np.sqrt(2)])
    with pytest.raises(ValueError):
        fwht(np.ones(6))


@pytest.mark.parametrize("N", [1, 2, 8, 64, 256, 4096])
def test_fwht_matches_dense_and_is_involution(N):
    x = np.random.default_rng(N).standard_normal(N)
    y = fwht(x)
    if N <= 256:
        np.testing.assert_allclose(y, hadamard_dense(N) @ x, atol=1e-12)
    np.testing.assert_allclose(fwht(y), x, atol=1e-12)


def test_fwht_batches_along_last_axis():
    X = np.random.default_rng(0).standard_normal((3, 512))
    np.testing.assert_allclose(fwht(X), np.stack([fwht(r) for r in X]), atol=1e-12)


def test_hadamard_blocks():
    assert sensing.hadamard_blocks(100) == (64, 32, 4)
    assert sensing.hadamard_blocks(64) == (64,)


def test_build_operator_contract():
    a, b = build_operator(1000, 200, 7), build_operator(1000, 200, 7)
    assert a == b
    assert sorted(a.col_perm) == list(range(1000))
    assert len(set(a.row_set)) == 200
    assert not np.array_equal(build_operator(1024, 100, 1).col_perm,
                              build_operator(1024, 100, 2).col_perm)
    assert build_operator(4, 2, 5).row_set.size == 2
    for m in (0, 4, 5):
        with pytest.raises(ValueError):
            build_operator(4, m, 0)


def test_known_small_measurement():
    op = SensingOperator(4, 4, 2, 0, np.arange(4), np.array([0, 1]))
    np.testing.assert_allclose(op.measure(np.ones(4)), [2, 0])
    assert not np.any(op.measure(np.zeros(4)))
    assert not np.any(op.adjoint(np.zeros(2)))


def test_dense_oracle_exhaustive_small():
    rng = np.random.default_rng(1)
    for N in range(2, 65):
        for seed in range(3):
            m = int(rng.integers(1, N))
            op = build_operator(N, m, seed)
            Phi = sensing_dense(op)
            x = rng.standard_normal(N)
            np.testing.assert_allclose(op.measure(x), Phi @ x, atol=1e-12)
            y = rng.standard_normal(m)
            np.testing.assert_allclose(op.adjoint(y), Phi.T @ y, atol=1e-12)


def test_dense_oracle_volume_shape():
    op = build_operator(32, 8, 3)
    X = np.random.default_rng(2).standard_normal((8, 4))
    np.testing.assert_allclose(op.measure(X), sensing_dense(op) @ X.ravel(order="F"), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(N=st.integers(2, 4096), frac=st.floats(0.01, 0.99), seed=st.integers(0, 2 ** 64 - 1))
def test_operator_algebra(N, frac, seed):
    m = min(max(1, int(frac * N)), N - 1)
    op = build_operator(N, m, seed)
    rng = np.random.default_rng(seed % 2 ** 32)
    X = rng.standard_normal(N)
    Y = rng.standard_normal(N)
    y = rng.standard_normal(m)
    assert abs(op.measure(X) @ y - X @ op.adjoint(y)) <= 1e-10 * (1 + np.linalg.norm(X) * np.linalg.norm(y))
    np.testing.assert_allclose(op.measure(op.adjoint(y)), y, atol=1e-10)
    P = op.project(X)
    np.testing.assert_allclose(op.project(P), P, atol=1e-10)
    assert abs(op.project(X) @ Y - X @ op.project(Y)) <= 1e-10 * (1 + np.linalg.norm(X) * np.linalg.norm(Y))
    assert np.linalg.norm(P) <= np.linalg.norm(X) + 1e-12
    assert np.linalg.norm(op.measure(X)) <= np.linalg.norm(X) + 1e-12
    np.testing.assert_allclose(op.measure(2 * X - 3 * Y), 2 * op.measure(X) - 3 * op.measure(Y),
                               atol=1e-12 * (1 + np.linalg.norm(X) + np.linalg.norm(Y)))


def test_full_operator_projects_to_identity():
    N = 64
    op = SensingOperator(N, N, N, 0, np.random.default_rng(0).permutation(N), np.arange(N))
    X = np.random.default_rng(1).standard_normal(N)
    np.testing.assert_allclose(op.project(X), X, atol=1e-12)


def test_constant_volume_is_observed():
    # the DC row of every Hadamard block is always measured, so a constant
    # volume keeps all of its energy
    for N in (100, 4096, 81920):
        op = build_operator(N, N // 10, 11)
        assert np.linalg.norm(op.measure(np.ones(N))) == pytest.approx(np.sqrt(N), rel=1e-12)


def test_size_mismatch():
    op = build_operator(16, 4, 0)
    with pytest.raises(ValueError):
        op.measure(np.ones(15))
    with pytest.raises(ValueError):
        op.adjoint(np.ones(5))


def test_measurement_file_roundtrip(tmp_path):
    y = np.random.default_rng(0).standard_normal(10)
    mf = MeasurementFile(48, 10, 2 ** 63 + 5, 4, 3, 1, 4, y)
    p = tmp_path / "m.bin"
    write_measurements(p, mf)
    raw = p.read_bytes()
    assert raw[:8] == b"LRSDCS01" and len(raw) == 8 + 7 * 8 + 10 * 8
    back = read_measurements(p)
    assert back.seed == mf.seed and back.frame_count == 4
    np.testing.assert_array_equal(back.y, y)

    p.write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(MeasurementFileError, match="magic"):
        read_measurements(p)
    p.write_bytes(raw[:-3])
    with pytest.raises(MeasurementFileError, match="payload"):
        read_measurements(p)
    p.write_bytes(raw[:20])
    with pytest.raises(MeasurementFileError, match="header"):
        read_measurements(p)
