"""Shared test helpers: gradient-check utilities and small configs."""

import numpy as np
import pytest

from okgan.gan import TrainConfig


def rel_err(approx, exact):
    """Norm-wise relative error, robust to near-zero components."""
    approx = np.asarray(approx, dtype=np.float64).ravel()
    exact = np.asarray(exact, dtype=np.float64).ravel()
    denom = max(np.linalg.norm(approx), np.linalg.norm(exact), 1e-300)
    return np.linalg.norm(approx - exact) / denom


def fd_gradient(f, x, h=1e-6):
    """Central finite differences of scalar f at vector x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def fd_param_gradients(net, x, dy, h=1e-5):
    """Central finite differences of sum(dy * net(x)) for every parameter."""
    grads = []
    for p in net.params():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = (net.forward(x, training=True)[0] * dy).sum()
            flat[i] = orig - h
            fm = (net.forward(x, training=True)[0] * dy).sum()
            flat[i] = orig
            gflat[i] = (fp - fm) / (2.0 * h)
        grads.append(g)
    return grads


def tiny_config(**overrides):
    """Desk-size training config for fast loop tests."""
    base = dict(
        dataset="ring8",
        kernel={"type": "gaussian", "gamma": 1.0},
        gen_hidden=(16, 16),
        batch_size=24,
        clf_batch_size=16,
        budget=128,
        gen_steps=3,
        rounds=4,
        eval_every=0,
        eval_samples=50,
        probe_count=8,
        seed=3,
    )
    base.update(overrides)
    return TrainConfig(**base).validate()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
