import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorpca import config
from tensorpca.errors import InvalidArgumentError, ResourceGuardError
from tensorpca.tensor_core import (Tensor3, check_dimension, combine, flatten_gram_matvec, frobenius_sq,
                                   mode_diag_sum, rank_one, sample_gaussian, sym_contract_matrix,
                                   sym_contract_vec, trilinear)


def _vec(seed, n):
    return np.random.default_rng(seed).standard_normal(n)


def test_trilinear_matches_einsum(random_tensor):
    T = random_tensor(5)
    x, y, z = _vec(1, 5), _vec(2, 5), _vec(3, 5)
    expected = np.einsum("ijk,i,j,k->", T.entries, x, y, z)
    assert trilinear(T, x, y, z) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), a=st.floats(-3, 3), b=st.floats(-3, 3), n=st.integers(1, 6))
def test_trilinear_is_linear_in_each_slot(seed, a, b, n):
    rng = np.random.default_rng(seed)
    T = Tensor3(rng.standard_normal((n, n, n)))
    x, w, y, z = (rng.standard_normal(n) for _ in range(4))
    lhs = trilinear(T, a * x + b * w, y, z)
    rhs = a * trilinear(T, x, y, z) + b * trilinear(T, w, y, z)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
    lhs = trilinear(T, y, z, a * x + b * w)
    rhs = a * trilinear(T, y, z, x) + b * trilinear(T, y, z, w)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31), c=st.floats(-4, 4), n=st.integers(2, 6))
def test_sym_contract_vec_is_homogeneous_of_degree_two(seed, c, n):
    rng = np.random.default_rng(seed)
    T = Tensor3(rng.standard_normal((n, n, n)))
    x = rng.standard_normal(n)
    np.testing.assert_allclose(sym_contract_vec(T, c * x), c * c * sym_contract_vec(T, x), rtol=1e-9, atol=1e-9)


def test_sym_contract_vec_matches_einsum(random_tensor):
    T = random_tensor(6, seed=3)
    x = _vec(4, 6)
    a = T.entries
    expected = (np.einsum("ijk,i,j->k", a, x, x) + np.einsum("ijk,i,k->j", a, x, x)
                + np.einsum("ijk,j,k->i", a, x, x))
    np.testing.assert_allclose(sym_contract_vec(T, x), expected, rtol=1e-12, atol=1e-12)


def test_sym_contract_matrix_is_exactly_symmetric(random_tensor):
    T = random_tensor(7, seed=5)
    m = sym_contract_matrix(T, _vec(6, 7))
    assert np.array_equal(m, m.T)


def test_sym_contract_matrix_times_x_is_sym_contract_vec(random_tensor):
    T = random_tensor(6, seed=8)
    x = _vec(9, 6)
    np.testing.assert_allclose(sym_contract_matrix(T, x) @ x, sym_contract_vec(T, x), rtol=1e-10, atol=1e-10)


def test_mode_diag_sum_matches_loops(random_tensor):
    T = random_tensor(4, seed=2)
    a = T.entries
    expected = [sum(a[i, i, j] + a[i, j, i] + a[j, i, i] for i in range(4)) for j in range(4)]
    np.testing.assert_allclose(mode_diag_sum(T), expected, rtol=1e-12)


def test_rank_one_contractions():
    v = np.array([0.6, 0.8, 0.0])
    T = rank_one(v, 5.0)
    x = np.array([1.0, -2.0, 0.5])
    assert trilinear(T, x, x, x) == pytest.approx(5.0 * (v @ x) ** 3)
    np.testing.assert_allclose(sym_contract_vec(T, x), 15.0 * (v @ x) ** 2 * v)
    np.testing.assert_allclose(mode_diag_sum(T), 15.0 * v)


def test_flatten_gram_matvec(random_tensor):
    T = random_tensor(5, seed=11)
    w = _vec(12, 5)
    m = T.entries.reshape(5, 25)
    np.testing.assert_allclose(flatten_gram_matvec(T, w), m @ m.T @ w, rtol=1e-12)


def test_combine_and_operators(random_tensor):
    T, U = random_tensor(3, 1), random_tensor(3, 2)
    np.testing.assert_allclose(combine(T, U, 2.0, -0.5).entries, 2 * T.entries - 0.5 * U.entries)
    np.testing.assert_allclose((T - T).entries, 0.0)
    assert frobenius_sq(T + U) == pytest.approx(np.sum((T.entries + U.entries) ** 2))


def test_combine_dimension_mismatch(random_tensor):
    with pytest.raises(InvalidArgumentError):
        combine(random_tensor(3), random_tensor(4), 1.0, 1.0)


def test_tensor_is_read_only(random_tensor):
    T = random_tensor(3)
    with pytest.raises(ValueError):
        T.entries[0, 0, 0] = 1.0


@pytest.mark.parametrize("bad", [np.zeros((2, 3, 2)), np.zeros((2, 2)), np.full((2, 2, 2), np.nan)])
def test_tensor_rejects_bad_arrays(bad):
    with pytest.raises(InvalidArgumentError):
        Tensor3(bad)


def test_from_flat_keeps_k_fastest():
    flat = np.arange(8.0)
    T = Tensor3.from_flat(flat, 2)
    assert T.entries[0, 1, 0] == 2.0
    assert T.entries[1, 0, 1] == 5.0
    np.testing.assert_array_equal(T.flat(), flat)


def test_sample_gaussian_is_reproducible_per_stream():
    a = sample_gaussian(4, 2.0, 11, 1)
    b = sample_gaussian(4, 2.0, 11, 1)
    c = sample_gaussian(4, 2.0, 11, 2)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


def test_sample_gaussian_variance():
    # 27000 entries: the sample variance is within 3% of 4 by a wide margin
    T = sample_gaussian(30, 4.0, 0, 1)
    assert np.var(T.entries) == pytest.approx(4.0, rel=0.03)


def test_sample_gaussian_rejects_non_positive_variance():
    with pytest.raises(InvalidArgumentError):
        sample_gaussian(3, 0.0, 0, 1)


def test_dimension_guard():
    config.configure(max_n=8)
    check_dimension(8)
    with pytest.raises(ResourceGuardError):
        Tensor3.zeros(9)
    with pytest.raises(InvalidArgumentError):
        check_dimension(0)


def test_single_precision_storage():
    config.configure(precision="single")
    T = sample_gaussian(4, 1.0, 0, 1)
    assert T.entries.dtype == np.float32
    assert mode_diag_sum(T).dtype == np.float64


def test_vector_length_checked(random_tensor):
    with pytest.raises(InvalidArgumentError):
        sym_contract_vec(random_tensor(3), np.ones(4))
