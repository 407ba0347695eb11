import numpy as np
import pytest

from okgan.kernels import (GammaSchedule, GaussianKernel, LinearKernel,
                           MixedGaussianKernel, MixedRqLinearKernel,
                           PolynomialKernel, RationalQuadraticKernel,
                           kernel_from_config, kernel_to_config, schedule_step)

from conftest import rel_err

ALL_KERNELS = [
    GaussianKernel(0.7),
    LinearKernel(),
    PolynomialKernel(gamma=0.3, coef0=0.5, degree=3),
    RationalQuadraticKernel(alpha=1.3),
    MixedGaussianKernel((0.5, 1.5, 4.0)),
    MixedRqLinearKernel((0.4, 1.0, 2.5)),
]


# ---------------------------------------------------------------------------
# Point values

def test_gaussian_at_equal_points_is_one(rng):
    k = GaussianKernel(3.7)
    x = rng.normal(size=5)
    assert k(x, x) == 1.0


def test_linear_dot_product():
    assert LinearKernel()(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0


def test_polynomial_cubic_value():
    # gamma 0.01, coef0 0, degree 3 on a dot product of 100 -> exactly 1
    k = PolynomialKernel(gamma=0.01, coef0=0.0, degree=3)
    x = np.array([10.0, 0.0])
    xp = np.array([10.0, 5.0])
    assert abs(k(x, xp) - 1.0) < 1e-12


def test_rq_at_equal_points_is_one(rng):
    for alpha in (0.2, 1.0, 7.5):
        x = rng.normal(size=3)
        assert RationalQuadraticKernel(alpha)(x, x) == 1.0


def test_mixed_gaussian_is_sum_of_members(rng):
    gammas = (0.3, 1.1, 2.9)
    mixed = MixedGaussianKernel(gammas)
    x, xp = rng.normal(size=4), rng.normal(size=4)
    assert mixed(x, xp) == sum(GaussianKernel(g)(x, xp) for g in gammas)


def test_parameter_validation():
    with pytest.raises(ValueError):
        GaussianKernel(0.0)
    with pytest.raises(ValueError):
        RationalQuadraticKernel(-1.0)
    with pytest.raises(ValueError):
        PolynomialKernel(gamma=1.0, degree=0)
    with pytest.raises(ValueError):
        MixedGaussianKernel(())


# ---------------------------------------------------------------------------
# Batch evaluation

def test_eval_batch_1x1_matches_pair(rng):
    for k in ALL_KERNELS:
        x, xp = rng.normal(size=3), rng.normal(size=3)
        assert abs(k.eval_batch(x[None], xp[None])[0, 0] - k(x, xp)) < 1e-12


def test_gaussian_batch_diagonal_is_one(rng):
    x = rng.normal(size=(6, 4))
    gram = GaussianKernel(2.0).eval_batch(x, x)
    assert np.abs(np.diag(gram) - 1.0).max() < 1e-12


def test_eval_batch_matches_double_loop(rng):
    w = rng.normal(size=(8, 5))
    x = rng.normal(size=(6, 5))
    for k in ALL_KERNELS:
        got = k.eval_batch(w, x)
        want = np.array([[k(wi, xj) for xj in x] for wi in w])
        assert rel_err(got, want) < 1e-12


def test_eval_batch_rejects_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        GaussianKernel(1.0).eval_batch(rng.normal(size=(3, 2)),
                                       rng.normal(size=(3, 4)))


def test_symmetry_exact(rng):
    for k in ALL_KERNELS:
        for _ in range(25):
            x, xp = rng.normal(size=4), rng.normal(size=4)
            assert k(x, xp) == k(xp, x)


def test_gram_matrices_psd(rng):
    pts = rng.normal(size=(10, 3))
    for k in ALL_KERNELS:
        gram = k.eval_batch(pts, pts)
        assert np.linalg.eigvalsh(gram).min() >= -1e-8


# ---------------------------------------------------------------------------
# Gradients

def test_gaussian_gradient_zero_at_center(rng):
    w = rng.normal(size=4)
    assert np.all(GaussianKernel(1.5).grad_x(w, w.copy()) == 0)


def test_linear_gradient_is_w(rng):
    w, x = rng.normal(size=3), rng.normal(size=3)
    assert np.array_equal(LinearKernel().grad_x(w, x), w)


def test_all_gradients_match_finite_differences(rng):
    h = 1e-6
    for k in ALL_KERNELS:
        worst = 0.0
        for _ in range(25):
            w, x = rng.normal(size=4), rng.normal(size=4)
            an = k.grad_x(w, x)
            fd = np.zeros(4)
            for i in range(4):
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                fd[i] = (k(w, xp) - k(w, xm)) / (2 * h)
            worst = max(worst, rel_err(fd, an))
        assert worst < 1e-6, type(k).__name__


def test_weighted_grad_is_sum_of_single_grads(rng):
    w = rng.normal(size=(7, 3))
    coeffs = rng.normal(size=7)
    x = rng.normal(size=(4, 3))
    for k in ALL_KERNELS:
        got = k.weighted_grad(w, coeffs, x)
        want = np.array([
            sum(c * k.grad_x(wi, xj) for wi, c in zip(w, coeffs))
            for xj in x])
        assert rel_err(got, want) < 1e-10


def test_expansion_matches_separate_calls(rng):
    w = rng.normal(size=(9, 2))
    coeffs = rng.normal(size=9)
    x = rng.normal(size=(5, 2))
    for k in ALL_KERNELS:
        vals, grads = k.expansion(w, coeffs, x)
        assert rel_err(vals, coeffs @ k.eval_batch(w, x)) < 1e-12
        assert rel_err(grads, k.weighted_grad(w, coeffs, x)) < 1e-12


# ---------------------------------------------------------------------------
# Bandwidth schedule

def test_schedule_single_step_value():
    sched = GammaSchedule(initial=0.2, ratio=1.0015)
    stepped = schedule_step(GaussianKernel(0.2), sched)
    assert abs(stepped.gamma - 0.2003) < 1e-12


def test_schedule_ratio_one_is_identity():
    sched = GammaSchedule(initial=0.5, ratio=1.0)
    assert schedule_step(GaussianKernel(0.5), sched).gamma == 0.5


def test_schedule_hundred_steps_closed_form():
    sched = GammaSchedule(initial=3.2, ratio=1.0015)
    kernel = GaussianKernel(3.2)
    for _ in range(100):
        kernel = schedule_step(kernel, sched)
    assert abs(kernel.gamma - 3.2 * 1.0015 ** 100) < 1e-12 * kernel.gamma


def test_schedule_rejects_non_gaussian():
    with pytest.raises(ValueError):
        schedule_step(LinearKernel(), GammaSchedule(1.0, 1.1))


def test_schedule_validation():
    with pytest.raises(ValueError):
        GammaSchedule(initial=0.0, ratio=1.1)
    with pytest.raises(ValueError):
        GammaSchedule(initial=1.0, ratio=0.9)


# ---------------------------------------------------------------------------
# Serialization

def test_kernel_config_round_trip():
    for k in ALL_KERNELS:
        assert kernel_from_config(kernel_to_config(k)) == k


def test_kernel_config_rejects_unknown_type():
    with pytest.raises(ValueError):
        kernel_from_config({"type": "sigmoid"})
