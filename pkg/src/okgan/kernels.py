"""Kernel families for the online classifier: batched evaluation, analytic
input-space gradients, and the geometric bandwidth schedule.

All kernels are immutable; `weighted_grad` computes d/dx of a full kernel
expansion sum_i c_i k(w_i, x) in one shot, which is what generator and encoder
backprop need.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# Bandwidths used for the mixed-Gaussian default, 1/(2 s^2) over s in
# {2, 5, 10, 20, 40, 80}.
MIXED_GAUSSIAN_DEFAULT = tuple(1.0 / (2.0 * s * s) for s in (2, 5, 10, 20, 40, 80))
# Shape parameters for the mixed RQ+linear default.
MIXED_RQ_LINEAR_DEFAULT = (0.2, 0.5, 1.0, 2.0, 5.0)


def _check_dims(w, x):
    if w.ndim != 2 or x.ndim != 2 or w.shape[1] != x.shape[1]:
        raise ValueError(
            f"dimension mismatch: {w.shape} vs {x.shape}")


def _sq_dists(w, x):
    # ||w||^2 + ||x||^2 - 2 <w, x>; the dot-product form keeps this a single
    # GEMM plus in-place passes. Cancellation can leave tiny negatives, clip
    # them. Single-pair evaluation uses the exactly-symmetric difference form
    # instead (see _pair methods).
    w2 = np.einsum("ij,ij->i", w, w)
    x2 = np.einsum("ij,ij->i", x, x)
    sq = w @ x.T
    sq *= -2.0
    sq += w2[:, None]
    sq += x2[None, :]
    np.maximum(sq, 0.0, out=sq)
    return sq


def _pair_sq_dist(x, xp):
    d = x - xp
    return float((d * d).sum())


class Kernel:
    """Common conveniences over the batched primitives."""

    def eval_batch(self, w, x):
        """(B, n) matrix of k(w_i, x_j)."""
        raise NotImplementedError

    def weighted_grad(self, w, coeffs, x):
        """(n, d) matrix of gradients d/dx_j of sum_i coeffs_i k(w_i, x_j)."""
        raise NotImplementedError

    def expansion(self, w, coeffs, x):
        """Values and gradients of the expansion sum_i coeffs_i k(w_i, x_j):
        ((n,), (n, d)). Subclasses override to share intermediates."""
        return coeffs @ self.eval_batch(w, x), self.weighted_grad(w, coeffs, x)

    def _pair(self, x, xp):
        return float(self.eval_batch(x[None, :], xp[None, :])[0, 0])

    def __call__(self, x, xp):
        x = np.asarray(x, dtype=np.float64)
        xp = np.asarray(xp, dtype=np.float64)
        if x.shape != xp.shape or x.ndim != 1:
            raise ValueError("expected two vectors of equal dimension")
        return self._pair(x, xp)

    def grad_x(self, w, x):
        """Gradient of k(w, x) with respect to x."""
        w = np.asarray(w, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        if w.shape != x.shape or x.ndim != 1:
            raise ValueError("expected two vectors of equal dimension")
        return self.weighted_grad(w[None, :], np.ones(1), x[None, :])[0]


@dataclass(frozen=True)
class GaussianKernel(Kernel):
    """exp(-gamma ||x - x'||^2)."""

    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")

    def eval_batch(self, w, x):
        _check_dims(w, x)
        k = _sq_dists(w, x)
        k *= -self.gamma
        np.exp(k, out=k)
        return k

    def weighted_grad(self, w, coeffs, x):
        k = self.eval_batch(w, x) * coeffs[:, None]          # (B, n)
        total = k.sum(axis=0)                                # (n,)
        pulled = k.T @ w                                     # (n, d)
        return -2.0 * self.gamma * (x * total[:, None] - pulled)

    def expansion(self, w, coeffs, x):
        # hot path during generator steps: one kernel matrix serves both the
        # expansion values and its input gradients
        k = self.eval_batch(w, x)
        k *= coeffs[:, None]
        total = k.sum(axis=0)
        pulled = k.T @ w
        grad = x * total[:, None]
        grad -= pulled
        grad *= -2.0 * self.gamma
        return total, grad

    def _pair(self, x, xp):
        return float(np.exp(-self.gamma * _pair_sq_dist(x, xp)))


@dataclass(frozen=True)
class LinearKernel(Kernel):
    """<x, x'>."""

    def eval_batch(self, w, x):
        _check_dims(w, x)
        return w @ x.T

    def weighted_grad(self, w, coeffs, x):
        g = coeffs @ w                                       # (d,)
        return np.broadcast_to(g, (x.shape[0], w.shape[1])).copy()

    def _pair(self, x, xp):
        return float(np.dot(x, xp))


@dataclass(frozen=True)
class PolynomialKernel(Kernel):
    """(gamma <x, x'> + coef0)^degree."""

    gamma: float
    coef0: float = 0.0
    degree: int = 3

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.degree < 1 or int(self.degree) != self.degree:
            raise ValueError("degree must be a positive integer")

    def eval_batch(self, w, x):
        _check_dims(w, x)
        return (self.gamma * (w @ x.T) + self.coef0) ** self.degree

    def weighted_grad(self, w, coeffs, x):
        u = self.gamma * (w @ x.T) + self.coef0              # (B, n)
        m = coeffs[:, None] * u ** (self.degree - 1)
        return self.degree * self.gamma * (m.T @ w)

    def _pair(self, x, xp):
        return float((self.gamma * np.dot(x, xp) + self.coef0) ** self.degree)


@dataclass(frozen=True)
class RationalQuadraticKernel(Kernel):
    """(1 + ||x - x'||^2 / (2 alpha))^(-alpha)."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")

    def eval_batch(self, w, x):
        _check_dims(w, x)
        return (1.0 + _sq_dists(w, x) / (2.0 * self.alpha)) ** (-self.alpha)

    def weighted_grad(self, w, coeffs, x):
        base = 1.0 + _sq_dists(w, x) / (2.0 * self.alpha)
        m = coeffs[:, None] * base ** (-self.alpha - 1.0)    # (B, n)
        total = m.sum(axis=0)
        pulled = m.T @ w
        return -(x * total[:, None] - pulled)

    def _pair(self, x, xp):
        sq = _pair_sq_dist(x, xp)
        return float((1.0 + sq / (2.0 * self.alpha)) ** (-self.alpha))


@dataclass(frozen=True)
class MixedGaussianKernel(Kernel):
    """Sum of Gaussian kernels over a bandwidth list."""

    gammas: tuple = MIXED_GAUSSIAN_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if not self.gammas or any(g <= 0 for g in self.gammas):
            raise ValueError("gammas must be a non-empty list of positives")

    def eval_batch(self, w, x):
        _check_dims(w, x)
        sq = _sq_dists(w, x)
        out = np.exp(-self.gammas[0] * sq)
        for g in self.gammas[1:]:
            out += np.exp(-g * sq)
        return out

    def weighted_grad(self, w, coeffs, x):
        sq = _sq_dists(w, x)
        out = np.zeros_like(x)
        for g in self.gammas:
            k = np.exp(-g * sq) * coeffs[:, None]
            total = k.sum(axis=0)
            pulled = k.T @ w
            out += -2.0 * g * (x * total[:, None] - pulled)
        return out

    def _pair(self, x, xp):
        sq = _pair_sq_dist(x, xp)
        return float(sum(np.exp(-g * sq) for g in self.gammas))


@dataclass(frozen=True)
class MixedRqLinearKernel(Kernel):
    """Linear kernel plus a sum of rational-quadratic kernels."""

    alphas: tuple = MIXED_RQ_LINEAR_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be a non-empty list of positives")

    def eval_batch(self, w, x):
        _check_dims(w, x)
        out = w @ x.T
        sq = _sq_dists(w, x)
        for a in self.alphas:
            out += (1.0 + sq / (2.0 * a)) ** (-a)
        return out

    def weighted_grad(self, w, coeffs, x):
        out = np.broadcast_to(coeffs @ w, x.shape).copy()
        sq = _sq_dists(w, x)
        for a in self.alphas:
            m = coeffs[:, None] * (1.0 + sq / (2.0 * a)) ** (-a - 1.0)
            total = m.sum(axis=0)
            pulled = m.T @ w
            out -= x * total[:, None] - pulled
        return out

    def _pair(self, x, xp):
        sq = _pair_sq_dist(x, xp)
        return float(np.dot(x, xp)
                     + sum((1.0 + sq / (2.0 * a)) ** (-a) for a in self.alphas))


# ---------------------------------------------------------------------------
# Bandwidth schedule

@dataclass(frozen=True)
class GammaSchedule:
    """Geometric growth of the Gaussian bandwidth, applied once per
    discriminator round."""

    initial: float
    ratio: float

    def __post_init__(self):
        if self.initial <= 0:
            raise ValueError("initial gamma must be > 0")
        if self.ratio < 1.0:
            raise ValueError("ratio must be >= 1")


def schedule_step(kernel, schedule: GammaSchedule):
    """New kernel with gamma scaled by the schedule ratio (Gaussian only)."""
    if not isinstance(kernel, GaussianKernel):
        raise ValueError("the bandwidth schedule applies only to the Gaussian kernel")
    return replace(kernel, gamma=kernel.gamma * schedule.ratio)


# ---------------------------------------------------------------------------
# Config (de)serialization

_KERNEL_NAMES = {
    GaussianKernel: "gaussian",
    LinearKernel: "linear",
    PolynomialKernel: "polynomial",
    RationalQuadraticKernel: "rational_quadratic",
    MixedGaussianKernel: "mixed_gaussian",
    MixedRqLinearKernel: "mixed_rq_linear",
}


def kernel_to_config(kernel) -> dict:
    cfg = {"type": _KERNEL_NAMES[type(kernel)]}
    if isinstance(kernel, GaussianKernel):
        cfg["gamma"] = kernel.gamma
    elif isinstance(kernel, PolynomialKernel):
        cfg.update(gamma=kernel.gamma, coef0=kernel.coef0, degree=kernel.degree)
    elif isinstance(kernel, RationalQuadraticKernel):
        cfg["alpha"] = kernel.alpha
    elif isinstance(kernel, MixedGaussianKernel):
        cfg["gammas"] = list(kernel.gammas)
    elif isinstance(kernel, MixedRqLinearKernel):
        cfg["alphas"] = list(kernel.alphas)
    return cfg


def kernel_from_config(cfg: dict):
    kind = cfg.get("type")
    if kind == "gaussian":
        return GaussianKernel(gamma=float(cfg["gamma"]))
    if kind == "linear":
        return LinearKernel()
    if kind == "polynomial":
        return PolynomialKernel(gamma=float(cfg["gamma"]),
                                coef0=float(cfg.get("coef0", 0.0)),
                                degree=int(cfg.get("degree", 3)))
    if kind == "rational_quadratic":
        return RationalQuadraticKernel(alpha=float(cfg["alpha"]))
    if kind == "mixed_gaussian":
        return MixedGaussianKernel(gammas=tuple(cfg.get("gammas", MIXED_GAUSSIAN_DEFAULT)))
    if kind == "mixed_rq_linear":
        return MixedRqLinearKernel(alphas=tuple(cfg.get("alphas", MIXED_RQ_LINEAR_DEFAULT)))
    raise ValueError(f"unknown kernel type {kind!r}")
