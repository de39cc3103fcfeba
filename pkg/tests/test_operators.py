import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from regkrylov.errors import DegenerateOperatorError, DimensionError, FormatError, NumericError, UnsupportedError
from regkrylov.operators import (
    DenseOperator,
    IdentityOperator,
    ScaledOperator,
    SeparableBlur,
    SparseOperator,
    StencilBlur,
    estimate_norm,
    load_matrix_market,
    scale_to_unit_norm,
    write_matrix_market,
)
from regkrylov.problems import gaussian_kernel, motion_psf, parallel_beam_matrix


def dense_by_columns(op):
    return np.column_stack([op._matvec(e) for e in np.eye(op.cols)])


def test_identity_apply_and_transpose():
    op = IdentityOperator(3)
    assert np.array_equal(op.apply(np.array([1.0, 2, 3])), [1, 2, 3])
    assert np.array_equal(op.apply_transpose(np.array([4.0, 5, 6])), [4, 5, 6])


def test_dense_small_example():
    op = DenseOperator([[1, 0], [0, 2], [1, 1]])
    assert np.array_equal(op.apply(np.ones(2)), [1, 2, 2])
    assert np.array_equal(op.apply_transpose(np.ones(3)), [2, 3])


def test_dimension_and_finiteness_checks():
    op = DenseOperator(np.ones((3, 2)))
    with pytest.raises(DimensionError):
        op.apply(np.ones(3))
    with pytest.raises(DimensionError):
        op.apply_transpose(np.ones(2))
    with pytest.raises(NumericError):
        op.apply(np.array([1.0, np.nan]))
    with pytest.raises(NumericError):
        op.apply_transpose(np.array([1.0, np.inf, 0.0]))


def test_counters_track_calls_exactly():
    op = DenseOperator(np.ones((4, 3)))
    for _ in range(5):
        op.apply(np.ones(3))
    for _ in range(2):
        op.apply_transpose(np.ones(4))
    assert (op.stats.matvec_count, op.stats.rmatvec_count, op.stats.total) == (5, 2, 7)
    op.to_dense()
    assert op.stats.total == 7
    fresh = op.with_fresh_stats()
    fresh.apply(np.ones(3))
    assert fresh.stats.total == 1 and op.stats.total == 7


def test_gaussian_blur_of_delta_is_centered_psf():
    k = gaussian_kernel(1.5)
    op = SeparableBlur((15, 15), k)
    delta = np.zeros((15, 15))
    delta[7, 7] = 1.0
    out = op.apply(delta.ravel()).reshape(15, 15)
    r = k.size // 2
    assert np.allclose(out[7 - r : 8 + r, 7 - r : 8 + r], np.outer(k, k), atol=1e-15)
    assert out.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(dense_by_columns(op), op.to_dense())


def _backends():
    rng = np.random.default_rng(3)
    yield "dense", DenseOperator(rng.standard_normal((12, 9))), 1e-12
    yield "sparse", SparseOperator(sp.random(20, 15, density=0.3, random_state=4)), 1e-12
    yield "separable", SeparableBlur((9, 11), gaussian_kernel(1.2), gaussian_kernel(0.7)), 1e-10
    yield "stencil", StencilBlur((10, 10), motion_psf(5, 30)), 1e-10
    yield "projector", parallel_beam_matrix(16, np.linspace(0, np.pi, 7, endpoint=False)), 1e-10
    yield "scaled", ScaledOperator(DenseOperator(rng.standard_normal((6, 6))), 3.0), 1e-12


@pytest.mark.parametrize("name,op,tol", list(_backends()), ids=[b[0] for b in _backends()])
def test_adjoint_identity_100_trials(name, op, tol):
    rng = np.random.default_rng(11)
    for _ in range(100):
        v = rng.standard_normal(op.cols)
        u = rng.standard_normal(op.rows)
        lhs = op.apply(v) @ u
        rhs = v @ op.apply_transpose(u)
        assert abs(lhs - rhs) <= tol * np.linalg.norm(op.apply(v)) * np.linalg.norm(u) + 1e-300


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 12), n=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_adjoint_property_dense(m, n, seed):
    rng = np.random.default_rng(seed)
    op = DenseOperator(rng.standard_normal((m, n)))
    v, u = rng.standard_normal(n), rng.standard_normal(m)
    assert np.isclose(op.apply(v) @ u, v @ op.apply_transpose(u), rtol=1e-12, atol=1e-12)


def test_random_sparse_adjoint_20x15():
    A = sp.random(20, 15, density=0.25, random_state=0)
    op = SparseOperator(A)
    rng = np.random.default_rng(0)
    v, u = rng.standard_normal(15), rng.standard_normal(20)
    assert abs(op.apply(v) @ u - v @ op.apply_transpose(u)) <= 1e-12 * abs(v @ op.apply_transpose(u))


def test_matrix_market_array_2x2(tmp_path):
    path = tmp_path / "a.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n")
    op = load_matrix_market(path)
    assert isinstance(op, DenseOperator)
    assert np.array_equal(op.to_dense(), [[1, 2], [3, 4]])


def test_matrix_market_coordinate_3x2(tmp_path):
    path = tmp_path / "c.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n3 2 3\n1 1 1.5\n2 2 -2\n3 1 4\n")
    op = load_matrix_market(path)
    assert op.backend == "sparse-CSR"
    dense = np.array([[1.5, 0], [0, -2], [4, 0]])
    v = np.array([0.3, -0.7])
    assert np.allclose(op.apply(v), dense @ v, rtol=0, atol=1e-15)


def test_matrix_market_wide_is_transposed(tmp_path):
    M = np.arange(40, dtype=float).reshape(5, 8)
    write_matrix_market(tmp_path / "w.mtx", M)
    op = load_matrix_market(tmp_path / "w.mtx")
    assert (op.rows, op.cols) == (8, 5)
    assert np.array_equal(op.to_dense(), M.T)


def test_matrix_market_round_trip_exact(tmp_path):
    rng = np.random.default_rng(5)
    M = rng.standard_normal((7, 4))
    write_matrix_market(tmp_path / "d.mtx", M)
    assert np.array_equal(load_matrix_market(tmp_path / "d.mtx").to_dense(), M)
    S = sp.random(9, 6, density=0.4, random_state=2, format="csr")
    write_matrix_market(tmp_path / "s.mtx", S)
    assert np.array_equal(load_matrix_market(tmp_path / "s.mtx").to_dense(), S.toarray())


@pytest.mark.parametrize(
    "text,error",
    [
        ("not a header\n1 1\n1\n", FormatError),
        ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", UnsupportedError),
        ("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n", UnsupportedError),
        ("%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1.0\n", FormatError),
    ],
)
def test_matrix_market_errors(tmp_path, text, error):
    path = tmp_path / "bad.mtx"
    path.write_text(text)
    with pytest.raises(error):
        load_matrix_market(path)


def test_scale_diag4():
    op = scale_to_unit_norm(DenseOperator(np.diag([4.0, 4.0])))
    assert np.allclose(op.apply(np.array([1.0, 0.0])), [1, 0], rtol=0.02, atol=0.02)
    assert op.backend == "scaled-wrapper"


def test_scale_of_unit_norm_operator():
    Q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((8, 8)))
    op = scale_to_unit_norm(DenseOperator(Q))
    assert 0.9 <= op.scale <= 1.1


def test_scale_random_10x10_against_svd():
    A = np.random.default_rng(2).standard_normal((10, 10))
    op = scale_to_unit_norm(DenseOperator(A))
    true_norm = np.linalg.norm(op.to_dense(), 2)
    assert 0.5 <= true_norm <= 1.5
    assert 0.5 <= estimate_norm(op) <= 1.5


def test_scale_zero_operator_rejected():
    with pytest.raises(DegenerateOperatorError):
        scale_to_unit_norm(DenseOperator(np.zeros((3, 2))))


def test_scaled_wrapper_counts_only_itself():
    inner = DenseOperator(np.eye(3) * 2)
    op = ScaledOperator(inner, 2.0)
    op.apply(np.ones(3))
    assert op.stats.total == 1 and inner.stats.total == 0
