import numpy as np
import pytest

from tensorpca.algorithms import HomotopySchedule
from tensorpca.diagnostics import (SIN_THETA_NOTE, MomentReport, classify_point, delta_moments, exact_u_second_moment,
                                   fd_gradient, fd_hessian, goe_spectrum_check, hessian_top_eig,
                                   injection_moments, noise_hessian_top, sin_theta, trace_path, u_moments)
from tensorpca.errors import InvalidArgumentError, NonConvergenceError
from tensorpca.model import generate
from tensorpca.tensor_core import sample_gaussian, sym_contract_matrix


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exact_u_second_moment(n):
    assert exact_u_second_moment(n) == pytest.approx(3 * n * (n - 1) + 9 * n)
    assert exact_u_second_moment(n, 2.5) == pytest.approx(2.5 * (3 * n * (n - 1) + 9 * n))


def test_exact_u_second_moment_size_limit():
    with pytest.raises(InvalidArgumentError):
        exact_u_second_moment(7)


def test_u_moments_small():
    # 4000 trials at n = 10: relative standard errors ~ 0.007 and ~ 0.022
    norm, corr = u_moments(10, 1.0, 4000, seed=1)
    assert norm.theoretical == 3 * 10 * 9 + 90
    assert corr.theoretical == 9 + 27
    assert norm.passed and corr.passed


def test_u_moments_threads_do_not_change_results():
    a = u_moments(6, 2.0, 200, seed=3, threads=1)
    b = u_moments(6, 2.0, 200, seed=3, threads=3)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_delta_moments_at_signal():
    v = np.zeros(10)
    v[0] = 1.0
    norm, corr = delta_moments(10, 1.0, v, v, 4000, seed=2)
    assert corr.theoretical == pytest.approx(9.0)
    assert norm.theoretical == pytest.approx(36.0)
    assert norm.passed and corr.passed
    assert 1.0 <= norm.detail["constant"] <= 9.0


def test_delta_moments_needs_nonzero_x():
    with pytest.raises(InvalidArgumentError):
        delta_moments(4, 1.0, np.zeros(4), np.ones(4), 10, seed=0)


def test_injection_moments():
    # 40000 draws: variance SE ~ 0.7%, well inside the 3% bound
    variance, cross_p, cross_entry = injection_moments(5, 40_000, seed=4)
    assert variance.theoretical == 5.0
    assert variance.passed and cross_p.passed and cross_entry.passed
    assert cross_p.kind == "zero"


def test_injection_moments_follow_the_injected_tensors():
    a = injection_moments(3, 300, seed=8, n=3, threads=1)
    b = injection_moments(3, 300, seed=8, n=3, threads=4)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    with pytest.raises(InvalidArgumentError):
        injection_moments(3, 10, seed=0, n=1)
    with pytest.raises(InvalidArgumentError):
        injection_moments(1, 10, seed=0)


def test_hessian_top_eig_on_known_spectrum():
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))
    h0 = q @ np.diag([5.0, 3.0, 1.0, -2.0, -6.0]) @ q.T
    h = (h0 + h0.T) / 2
    lam, b = hessian_top_eig(h)
    assert lam == pytest.approx(5.0, abs=1e-6)
    assert abs(b @ q[:, 0]) == pytest.approx(1.0, abs=1e-6)
    assert b[np.argmax(np.abs(b))] > 0


@pytest.mark.parametrize("scale", [1.0, 50.0])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_hessian_top_eig_matches_dense_solver(seed, scale):
    a = np.random.default_rng(seed).standard_normal((8, 8)) * scale
    h = (a + a.T) / 2
    lam, b = hessian_top_eig(h)
    vals, vecs = np.linalg.eigh(h)
    top = vecs[:, -1]
    if top[np.argmax(np.abs(top))] < 0:
        top = -top
    assert lam == pytest.approx(vals[-1], abs=1e-8)
    np.testing.assert_allclose(b, top, atol=1e-7)
    assert np.linalg.norm(h @ b - lam * b) <= 1e-8


def test_hessian_top_eig_bounds_every_rayleigh_quotient():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((12, 12))
    h = (a + a.T) / 2
    lam, _ = hessian_top_eig(h)
    for _ in range(100):
        x = rng.standard_normal(12)
        x /= np.linalg.norm(x)
        assert lam >= x @ h @ x - 1e-10


def test_hessian_top_eig_edge_cases():
    lam, b = hessian_top_eig(np.zeros((3, 3)))
    assert lam == 0.0 and list(b) == [1.0, 0.0, 0.0]
    with pytest.raises(InvalidArgumentError):
        hessian_top_eig(np.array([[0.0, 1.0], [2.0, 0.0]]))
    h = np.diag([1.0, 0.999, -1.0])
    with pytest.raises(NonConvergenceError) as info:
        hessian_top_eig(h, iters=2)
    assert info.value.estimate is not None


def test_noise_hessian_top_matches_numpy():
    A = sample_gaussian(8, 1.0, 5, 1)
    x = np.random.default_rng(6).standard_normal(8)
    assert noise_hessian_top(A, x) == pytest.approx(np.linalg.eigvalsh(sym_contract_matrix(A, x))[-1])


def test_goe_spectrum_check_small():
    report = goe_spectrum_check(25, 30, seed=0)
    assert report.kind == "bracket"
    assert report.passed
    assert 0.5 <= report.detail["min"] <= report.detail["max"] <= 6.0


def test_goe_spectrum_needs_trials():
    with pytest.raises(InvalidArgumentError):
        goe_spectrum_check(10, 5, seed=0)


def test_fd_helpers_on_quadratic():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])

    def f(x):
        return 0.5 * x @ a @ x

    x = np.array([0.5, -1.0])
    np.testing.assert_allclose(fd_gradient(f, x), a @ x, atol=1e-8)
    np.testing.assert_allclose(fd_hessian(f, x), a, atol=1e-6)


def test_classify_point():
    v = np.array([1.0, 0.0, 0.0, 0.0])
    assert classify_point(v, v, 4) == "good"
    assert classify_point([0.0, 0.1, 0.0, 0.0], v, 4) == "bad"
    assert classify_point([0.0, 3.0, 0.0, 0.0], v, 4) == "unclassified"


def test_sin_theta():
    assert sin_theta(np.array([1.0, 0.0]), np.array([0.0, 2.0])) == pytest.approx(1.0)
    assert sin_theta(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-7)


def test_moment_report_builders():
    r = MomentReport.relative("x", np.array([1.0, 3.0]), 2.0, 0.1)
    assert r.passed and r.deviation == 0.0
    rate = MomentReport.rate("hits", np.array([1.0, 1.0, 0.0, 1.0]), 0.7)
    assert rate.passed and rate.empirical == 0.75
    seen = MomentReport.observed("raw", np.array([0.2, 0.4]), SIN_THETA_NOTE)
    assert seen.passed and seen.detail["note"] == SIN_THETA_NOTE
    assert set(r.to_dict()) == {"name", "empirical", "theoretical", "trials", "deviation", "bound", "passed",
                                "kind", "std_error", "detail"}


def test_trace_path_on_strong_instance():
    inst = generate(16, 8 * 16 ** 0.75, 1.0, seed=7)
    schedule = HomotopySchedule.geometric(16, stages=4)
    points = trace_path(inst.tensor, inst.v, schedule, inst.tau)
    assert [p.t for p in points] == list(schedule.t_values)
    assert points[-1].point_class == "good"
    assert not any(p.stalled for p in points)
    for p in points:
        assert all(b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(p.ascent_values, p.ascent_values[1:]))
        d = p.to_dict()
        assert d["class"] == p.point_class
        assert 0.0 <= d["sin_theta_b_v"] <= 1.0
        assert d["delta_norm_ratio"] >= 0.0
