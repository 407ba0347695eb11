"""Dense float64 numerics: seeded RNG streams, an MLP with batch normalization
and hand-written backprop, the Adam optimizer, and a small-matrix PCA.

All matrices are numpy float64 arrays in row-major order, one sample per row.
"""

from __future__ import annotations

import numpy as np

# Named substreams derived from one experiment seed. Fixed indices keep the
# mapping stable across releases; adding a name must append, never reorder.
STREAM_NAMES = ("data", "noise", "shuffle", "init", "probes", "eval")


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent child generator number `index` of the given seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def named_streams(seed: int) -> dict:
    """The full set of named substreams used by the training drivers."""
    return {name: substream(seed, i) for i, name in enumerate(STREAM_NAMES)}


def sample_gaussian(rng: np.random.Generator, n: int, d: int,
                    mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """n x d matrix of i.i.d. N(mean, std^2) draws."""
    if std <= 0:
        raise ValueError("std must be > 0")
    return rng.normal(mean, std, size=(n, d))


# ---------------------------------------------------------------------------
# Activations

_ACTIVATIONS = ("identity", "relu", "leaky_relu", "tanh")
_LEAKY_SLOPE = 0.2


def _act_forward(kind, h):
    # h is consumed (in-place where possible); callers own it
    if kind == "identity":
        return h
    if kind == "relu":
        return np.maximum(h, 0.0, out=h)
    if kind == "leaky_relu":
        return np.where(h > 0, h, _LEAKY_SLOPE * h)
    if kind == "tanh":
        return np.tanh(h, out=h)
    raise ValueError(f"unknown activation {kind!r}")


def _act_backward(kind, y, dy):
    # every supported activation's derivative is recoverable from its output:
    # relu/leaky keep the sign of their input, tanh' = 1 - tanh^2
    if kind == "identity":
        return dy
    if kind == "relu":
        return dy * (y > 0)
    if kind == "leaky_relu":
        return dy * np.where(y > 0, 1.0, _LEAKY_SLOPE)
    if kind == "tanh":
        return dy * (1.0 - y * y)
    raise ValueError(f"unknown activation {kind!r}")


# ---------------------------------------------------------------------------
# Batch normalization

class BatchNorm:
    """Per-feature batch normalization for dense layers.

    Training mode normalizes by batch statistics and folds them into the
    running statistics; evaluation mode normalizes by the running statistics.
    ``momentum`` is the fraction of the old running value kept per update.
    """

    def __init__(self, dim, momentum=0.9, eps=1e-5):
        self.scale = np.ones(dim)
        self.shift = np.zeros(dim)
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.momentum = float(momentum)
        self.eps = float(eps)

    def forward(self, z, training):
        """Consumes z (normalizes it in place); callers pass an owned array."""
        if training:
            mean = z.mean(axis=0)
            z -= mean
            var = np.einsum("ij,ij->j", z, z) / z.shape[0]
            m = self.momentum
            self.running_mean = m * self.running_mean + (1.0 - m) * mean
            # keep the invariant running_var >= eps even for degenerate batches
            self.running_var = np.maximum(
                m * self.running_var + (1.0 - m) * var, self.eps)
        else:
            var = self.running_var
            z -= self.running_mean
        inv_std = 1.0 / np.sqrt(var + self.eps)
        z *= inv_std
        out = z * self.scale
        out += self.shift
        cache = (z, inv_std) if training else None
        return out, cache

    def backward(self, cache, dout):
        """Gradient through a training-mode forward (batch stats included)."""
        z_hat, inv_std = cache
        n = z_hat.shape[0]
        dscale = np.einsum("ij,ij->j", dout, z_hat)
        dshift = dout.sum(axis=0)
        # closed form including the mean/variance dependence on the batch:
        # dz = (inv_std/n) * (n*dz_hat - sum(dz_hat) - z_hat*sum(dz_hat*z_hat))
        # with dz_hat = dout*scale, so sum(dz_hat*z_hat) = dscale*scale.
        dz = dout * (self.scale * n)
        dz -= self.scale * dshift
        dz -= z_hat * (dscale * self.scale)
        dz *= inv_std / n
        return dz, dscale, dshift


# ---------------------------------------------------------------------------
# MLP

class DenseLayer:
    """Affine transform with optional batch norm and a fixed activation."""

    def __init__(self, weight, bias, activation="identity", batch_norm=None):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.weight = np.asarray(weight, dtype=np.float64)  # (in, out)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ValueError("weight must be (in, out) with bias of length out")
        self.activation = activation
        self.batch_norm = batch_norm


class MlpNetwork:
    """Fully connected network over float64 batches (rows are samples)."""

    def __init__(self, layers):
        if not layers:
            raise ValueError("need at least one layer")
        for a, b in zip(layers, layers[1:]):
            if a.weight.shape[1] != b.weight.shape[0]:
                raise ValueError("consecutive layer dimensions disagree")
        self.layers = list(layers)

    @property
    def in_dim(self):
        return self.layers[0].weight.shape[0]

    @property
    def out_dim(self):
        return self.layers[-1].weight.shape[1]

    def has_batch_norm(self):
        return any(l.batch_norm is not None for l in self.layers)

    def forward(self, x, training):
        """Returns (output, cache). The cache is None in evaluation mode and
        is required by backward; training mode updates batch-norm running
        statistics as a side effect."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(
                f"input must be (n, {self.in_dim}), got {x.shape}")
        if training and x.shape[0] < 2 and self.has_batch_norm():
            raise ValueError("batch norm needs n >= 2 in training mode")
        caches = [] if training else None
        for layer in self.layers:
            z = x @ layer.weight
            z += layer.bias
            if layer.batch_norm is not None:
                h, bn_cache = layer.batch_norm.forward(z, training)
            else:
                h, bn_cache = z, None
            y = _act_forward(layer.activation, h)
            if training:
                caches.append((x, y, bn_cache))
            x = y
        return x, caches

    def backward(self, cache, dy):
        """Exact gradients of sum(dy * forward(x)) wrt parameters and input.

        `cache` must come from a training-mode forward on this network.
        Returns (grads, dx) with grads laid out exactly like params().
        """
        if cache is None or len(cache) != len(self.layers):
            raise ValueError("cache does not match this network")
        dy = np.asarray(dy, dtype=np.float64)
        if dy.shape != (cache[-1][1].shape[0], self.out_dim):
            raise ValueError("upstream gradient shape mismatch")
        grads_rev = []
        for layer, (x_in, y, bn_cache) in zip(
                reversed(self.layers), reversed(cache)):
            dh = _act_backward(layer.activation, y, dy)
            if layer.batch_norm is not None:
                dz, dscale, dshift = layer.batch_norm.backward(bn_cache, dh)
            else:
                dz = dh
            dw = x_in.T @ dz
            db = dz.sum(axis=0)
            dy = dz @ layer.weight.T
            entry = [dw, db]
            if layer.batch_norm is not None:
                entry += [dscale, dshift]
            grads_rev.append(entry)
        grads = []
        for entry in reversed(grads_rev):
            grads.extend(entry)
        return grads, dy

    def params(self):
        """Live parameter arrays, in a fixed order mirrored by backward()."""
        out = []
        for layer in self.layers:
            out.append(layer.weight)
            out.append(layer.bias)
            if layer.batch_norm is not None:
                out.append(layer.batch_norm.scale)
                out.append(layer.batch_norm.shift)
        return out


def build_mlp(rng, in_dim, hidden, out_dim, hidden_activation="relu",
              out_activation="identity", batch_norm=True, weight_scale=0.02,
              bn_momentum=0.9, bn_eps=1e-5):
    """Standard stack: hidden affine(+bn)+activation layers, plain output layer.

    Weights are N(0, weight_scale^2), biases zero.
    """
    dims = [in_dim] + list(hidden) + [out_dim]
    layers = []
    for i, (a, b) in enumerate(zip(dims, dims[1:])):
        last = i == len(dims) - 2
        layers.append(DenseLayer(
            weight=rng.normal(0.0, weight_scale, size=(a, b)),
            bias=np.zeros(b),
            activation=out_activation if last else hidden_activation,
            batch_norm=None if (last or not batch_norm)
            else BatchNorm(b, momentum=bn_momentum, eps=bn_eps),
        ))
    return MlpNetwork(layers)


# ---------------------------------------------------------------------------
# Adam

class AdamState:
    """Moment accumulators for a fixed parameter list."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)


def adam_step(params, grads, state, lr):
    """One bias-corrected Adam update, in place on `params`."""
    if lr <= 0:
        raise ValueError("lr must be > 0")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state layouts disagree")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient entries; step rejected")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        gg = g * g
        gg *= 1.0 - b2
        v *= b2
        v += gg
        denom = v / bc2
        np.sqrt(denom, out=denom)
        denom += state.eps
        update = m / denom
        update *= lr / bc1
        p -= update


# ---------------------------------------------------------------------------
# PCA (top-2) via power iteration with deflation

_PCA_TOL = 1e-10
_PCA_MAX_ITER = 10_000


def _top_eigenpairs(s, k, tol=_PCA_TOL, max_iter=_PCA_MAX_ITER):
    """Top-k eigenpairs of a symmetric PSD matrix by deflated power iteration.

    Returns (values desc, vectors as columns). Eigenvalues indistinguishable
    from zero produce zero vectors.
    """
    n = s.shape[0]
    scale = float(np.trace(s))
    zero_tol = max(scale, 1.0) * 1e-14
    rng = np.random.default_rng(0x0F1CE)  # fixed: determinism across calls
    values = np.zeros(k)
    vectors = np.zeros((n, k))
    for j in range(k):
        v = rng.normal(size=n)
        for i in range(j):  # start orthogonal to found components
            v -= vectors[:, i] * (vectors[:, i] @ v)
        norm = np.linalg.norm(v)
        if norm <= zero_tol:
            break
        v /= norm
        lam = 0.0
        for _ in range(max_iter):
            w = s @ v
            for i in range(j):  # deflation: (S - sum lam_i u_i u_i^T) v
                w -= values[i] * vectors[:, i] * (vectors[:, i] @ v)
            for i in range(j):  # re-orthogonalize against drift
                w -= vectors[:, i] * (vectors[:, i] @ w)
            norm = np.linalg.norm(w)
            if norm <= zero_tol:
                lam = 0.0
                v = np.zeros(n)
                break
            v_new = w / norm
            lam = norm
            if np.linalg.norm(w - norm * v) <= tol * max(scale, 1.0):
                v = v_new
                break
            v = v_new
        if lam <= zero_tol:
            break
        # canonical sign: largest-magnitude entry positive
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:
            v = -v
        values[j] = lam
        vectors[:, j] = v
    return values, vectors


def principal_directions(m, k=2):
    """Top-k principal directions of the rows of m.

    Returns (components (k, cols), variances (k,) descending). Components are
    orthonormal; zero rows mark rank deficiency. Uses the Gram matrix of
    whichever side (features or samples) is smaller.
    """
    m = np.asarray(m, dtype=np.float64)
    t, cols = m.shape
    xc = m - m.mean(axis=0)
    if cols <= t:
        values, vecs = _top_eigenpairs(xc.T @ xc, k)
        comps = vecs.T
    else:
        values, vecs = _top_eigenpairs(xc @ xc.T, k)
        comps = np.zeros((k, cols))
        for j in range(k):
            if values[j] > 0:
                comps[j] = (xc.T @ vecs[:, j]) / np.sqrt(values[j])
    denom = max(t - 1, 1)
    return comps, values / denom


def pca_top2(m):
    """Rows of m centered and projected onto their top-2 principal directions.

    Deterministic up to per-component sign; a rank-0 centered matrix projects
    to all zeros.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    t, cols = m.shape
    if t < 3 or cols < 2:
        raise ValueError("pca_top2 needs at least 3 rows and 2 columns")
    comps, _ = principal_directions(m, k=2)
    xc = m - m.mean(axis=0)
    return xc @ comps.T
