"""Budgeted online kernel classifier: the non-parametric discriminator.

The classifier is a kernel expansion f(x) = rho + sum_i alpha_i k(w_i, x) over
a FIFO budget of stored examples. Minibatch updates score the batch against
the frozen pre-batch state, decay every stored coefficient by (1 - eta*lambda),
append one new (example, coefficient) pair per batch element, overwrite rho
with the mean of the new coefficients, and evict the oldest entries beyond the
budget.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .kernels import kernel_to_config

LOSS_KINDS = ("hinge", "logistic")


def loss_value(kind, scores, labels, margin=1.0):
    """Elementwise loss l(f(x), y) for y in {-1, +1}."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if kind == "hinge":
        return np.maximum(0.0, margin - labels * scores)
    if kind == "logistic":
        # log(1 + exp(-y f)) without overflow
        return np.logaddexp(0.0, -labels * scores)
    raise ValueError(f"unknown loss {kind!r}")


def loss_derivative(kind, scores, labels, margin=1.0):
    """Elementwise derivative of the loss in its first argument."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if kind == "hinge":
        return np.where(margin - labels * scores > 0, -labels, 0.0)
    if kind == "logistic":
        # -y * sigmoid(-y f), written via tanh for stability
        t = labels * scores
        return -labels * 0.5 * (1.0 - np.tanh(0.5 * t))
    raise ValueError(f"unknown loss {kind!r}")


class BudgetedKernelMachine:
    """Online kernel classifier with a Remove-Oldest (FIFO) budget."""

    def __init__(self, kernel, budget, step_size=0.05, reg_lambda=0.1,
                 loss="hinge", margin=1.0, offset=0.0, keep_zero_coeffs=True):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        if step_size <= 0:
            raise ValueError("step_size must be > 0")
        if reg_lambda <= 0:
            raise ValueError("reg_lambda must be > 0")
        if loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}")
        if margin <= 0:
            raise ValueError("margin must be > 0")
        self.kernel = kernel
        self.budget = int(budget)
        self.step_size = float(step_size)
        self.reg_lambda = float(reg_lambda)
        self.loss = loss
        self.margin = float(margin)
        self.offset = float(offset)
        # store entries with alpha exactly 0 (satisfied margins) unless disabled
        self.keep_zero_coeffs = bool(keep_zero_coeffs)
        self._examples = np.zeros((0, 0))
        self._coeffs = np.zeros(0)
        self._insert_ids = np.zeros(0, dtype=np.int64)
        self._next_id = 0

    def __len__(self):
        return self._coeffs.shape[0]

    @property
    def dim(self):
        """Example dimension, or None before the first insertion."""
        return self._examples.shape[1] if len(self) else None

    @property
    def examples(self):
        return self._examples

    @property
    def coefficients(self):
        return self._coeffs

    @property
    def insertion_ids(self):
        return self._insert_ids

    @property
    def insertion_counter(self):
        """Next insertion index to be assigned."""
        return self._next_id

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("expected a 2-d batch of examples")
        if len(self) and x.shape[1] != self._examples.shape[1]:
            raise ValueError(
                f"dimension mismatch: machine stores d={self._examples.shape[1]}, "
                f"got d={x.shape[1]}")
        return x

    def predict(self, x):
        """f(x) = rho + sum_i alpha_i k(w_i, x), one value per row of x."""
        x = self._check_input(x)
        if not len(self):
            return np.full(x.shape[0], self.offset)
        k = self.kernel.eval_batch(self._examples, x)
        return self.offset + self._coeffs @ k

    def input_gradient(self, x):
        """Gradient of predict at a single point x."""
        x = np.asarray(x, dtype=np.float64)
        return self.input_gradient_batch(x[None, :])[0]

    def input_gradient_batch(self, x):
        """(n, d) gradients of predict at each row of x."""
        x = self._check_input(x)
        if not len(self):
            return np.zeros_like(x)
        return self.kernel.weighted_grad(self._examples, self._coeffs, x)

    def predict_and_input_gradient(self, x):
        """predict(x) and its input gradients in one pass (shared kernel
        matrix; the training hot path)."""
        x = self._check_input(x)
        if not len(self):
            return np.full(x.shape[0], self.offset), np.zeros_like(x)
        values, grads = self.kernel.expansion(self._examples, self._coeffs, x)
        return self.offset + values, grads

    def update_minibatch(self, x, y):
        """One online update on a labeled minibatch (labels in {-1, +1})."""
        x = self._check_input(x)
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (x.shape[0],):
            raise ValueError("labels must be one per example")
        if x.shape[0] == 0:
            raise ValueError("empty minibatch")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be +1 or -1")

        scores = self.predict(x)  # frozen pre-batch state, no self-interaction
        new_coeffs = -self.step_size * loss_derivative(
            self.loss, scores, y, self.margin)
        self._coeffs = self._coeffs * (1.0 - self.step_size * self.reg_lambda)
        self.offset = float(new_coeffs.mean())

        keep_x, keep_c = x, new_coeffs
        if not self.keep_zero_coeffs:
            mask = new_coeffs != 0.0
            keep_x, keep_c = x[mask], new_coeffs[mask]
        ids = np.arange(self._next_id, self._next_id + keep_c.shape[0],
                        dtype=np.int64)
        self._next_id += keep_c.shape[0]
        if len(self):
            self._examples = np.concatenate([self._examples, keep_x])
            self._coeffs = np.concatenate([self._coeffs, keep_c])
            self._insert_ids = np.concatenate([self._insert_ids, ids])
        else:
            self._examples = keep_x.copy()
            self._coeffs = keep_c.copy()
            self._insert_ids = ids
        if len(self) > self.budget:  # Remove-Oldest
            cut = len(self) - self.budget
            self._examples = self._examples[cut:]
            self._coeffs = self._coeffs[cut:]
            self._insert_ids = self._insert_ids[cut:]
        return self

    def fit_round(self, reals, fakes, clf_batch_size, rng):
        """One discriminator round: label reals +1 and fakes -1, shuffle, and
        run sequential minibatch updates (last batch may be smaller)."""
        reals = np.asarray(reals, dtype=np.float64)
        fakes = np.asarray(fakes, dtype=np.float64)
        if reals.size == 0 or fakes.size == 0:
            raise ValueError("empty inputs")
        if reals.shape[1] != fakes.shape[1]:
            raise ValueError("reals and fakes disagree on dimension")
        n_total = reals.shape[0] + fakes.shape[0]
        if clf_batch_size < 1 or clf_batch_size > n_total:
            raise ValueError("clf_batch_size must be in [1, total examples]")
        x = np.concatenate([reals, fakes])
        y = np.concatenate([np.ones(reals.shape[0]), -np.ones(fakes.shape[0])])
        perm = rng.permutation(n_total)
        for start in range(0, n_total, clf_batch_size):
            idx = perm[start:start + clf_batch_size]
            self.update_minibatch(x[idx], y[idx])
        return self

    def rkhs_norm_sq(self):
        """||f||_H^2 = alpha^T K alpha over the stored entries (rho excluded)."""
        if not len(self):
            return 0.0
        k = self.kernel.eval_batch(self._examples, self._examples)
        return float(self._coeffs @ k @ self._coeffs)

    def regularized_risk(self, x, y, reg_lambda=None):
        """Mean loss on (x, y) plus (lambda/2) ||f||_H^2."""
        lam = self.reg_lambda if reg_lambda is None else float(reg_lambda)
        x = self._check_input(x)
        y = np.asarray(y, dtype=np.float64)
        losses = loss_value(self.loss, self.predict(x), y, self.margin)
        return float(losses.mean() + 0.5 * lam * self.rkhs_norm_sq())

    def snapshot(self):
        """Entry arrays and counters as plain copies (checkpointing)."""
        return {
            "examples": self._examples.copy(),
            "coeffs": self._coeffs.copy(),
            "ids": self._insert_ids.copy(),
            "offset": self.offset,
            "next_id": self._next_id,
        }

    def restore(self, examples, coeffs, ids, offset, next_id):
        """Overwrite entries and counters (checkpoint loading)."""
        examples = np.asarray(examples, dtype=np.float64)
        coeffs = np.asarray(coeffs, dtype=np.float64)
        ids = np.asarray(ids, dtype=np.int64)
        if examples.ndim != 2 or coeffs.shape != (examples.shape[0],) \
                or ids.shape != coeffs.shape:
            raise ValueError("inconsistent entry arrays")
        if examples.shape[0] > self.budget:
            raise ValueError("more entries than the budget allows")
        self._examples = examples
        self._coeffs = coeffs
        self._insert_ids = ids
        self.offset = float(offset)
        self._next_id = int(next_id)
        return self

    def state_digest(self):
        """Hash of the full machine state; cheap change detection for tests
        and manifests."""
        h = hashlib.sha256()
        h.update(json.dumps(kernel_to_config(self.kernel), sort_keys=True).encode())
        h.update(np.float64(self.offset).tobytes())
        h.update(np.int64(self._next_id).tobytes())
        h.update(self._examples.tobytes())
        h.update(self._coeffs.tobytes())
        h.update(self._insert_ids.tobytes())
        return h.hexdigest()
