"""Training diagnostics: discriminator-score trajectories on fixed probe
points (with 2-D PCA projection for cycling plots) and the discriminator
update timing benchmark.
"""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .numerics import pca_top2
from .okc import BudgetedKernelMachine
from .synthdata import GaussianMixtureSpec, VectorDataset, sample


class TrajectoryRecorder:
    """Score matrix over training time: one row of discriminator values on the
    frozen probe set per recorded round."""

    def __init__(self, probes):
        probes = np.asarray(probes, dtype=np.float64).copy()
        if probes.ndim != 2 or probes.shape[0] < 2:
            raise ValueError("need at least 2 probe points")
        probes.setflags(write=False)
        self.probes = probes
        self._rows = []
        self._rounds = []

    @classmethod
    def init_probes(cls, source, m, rng):
        """Draw m probe points once from the real distribution and freeze them."""
        if m < 2:
            raise ValueError("m must be >= 2")
        if isinstance(source, GaussianMixtureSpec):
            probes = sample(source, rng, m)
        elif isinstance(source, VectorDataset):
            replace = source.n < m
            idx = rng.choice(source.n, size=m, replace=replace)
            probes = source.samples[idx]
        else:
            raise TypeError("source must be a GaussianMixtureSpec or VectorDataset")
        return cls(probes)

    @property
    def rounds(self):
        return list(self._rounds)

    def __len__(self):
        return len(self._rows)

    def record(self, score_fn, round_index):
        """Append the probe scores for a training round (rounds must increase)."""
        if self._rounds and round_index <= self._rounds[-1]:
            raise ValueError(
                f"round {round_index} not after last recorded {self._rounds[-1]}")
        row = np.asarray(score_fn(self.probes), dtype=np.float64).reshape(-1).copy()
        if row.shape[0] != self.probes.shape[0]:
            raise ValueError("score_fn must return one value per probe")
        self._rows.append(row)
        self._rounds.append(int(round_index))

    def matrix(self):
        return np.array(self._rows)

    def project(self):
        """T x 2 PCA projection of the score rows, in recording order."""
        if len(self._rows) < 3:
            raise ValueError("need at least 3 recorded rounds to project")
        return pca_top2(self.matrix())

    def probes_digest(self):
        return hashlib.sha256(self.probes.tobytes()).hexdigest()

    def write_csv(self, path):
        proj = self.project()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "pc1", "pc2"])
            for rnd, (a, b) in zip(self._rounds, proj):
                writer.writerow([rnd, repr(float(a)), repr(float(b))])


def turning_angle_fraction(projection) -> float:
    """Fraction of successive projected steps that turn by more than 90
    degrees. An artifact-defined heuristic for eyeballing cycling, not a
    published metric."""
    proj = np.asarray(projection, dtype=np.float64)
    steps = np.diff(proj, axis=0)
    norms = np.sqrt((steps ** 2).sum(axis=1))
    dots = (steps[:-1] * steps[1:]).sum(axis=1)
    valid = (norms[:-1] > 0) & (norms[1:] > 0)
    if not valid.any():
        return 0.0
    return float((dots[valid] < 0).mean())


@dataclass
class TimingReport:
    batch_sizes: list
    mean_seconds: list
    std_seconds: list
    reps: int

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["batch_size", "mean_seconds", "std_seconds"])
            for s, m, sd in zip(self.batch_sizes, self.mean_seconds, self.std_seconds):
                writer.writerow([s, repr(float(m)), repr(float(sd))])

    def linear_fit(self):
        """(slope, intercept, r_squared) of mean time against batch size."""
        x = np.asarray(self.batch_sizes, dtype=np.float64)
        y = np.asarray(self.mean_seconds, dtype=np.float64)
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        ss_res = ((y - pred) ** 2).sum()
        ss_tot = ((y - y.mean()) ** 2).sum()
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return float(slope), float(intercept), float(r2)


def time_discriminator_update(config, sizes, reps=5, dim=2,
                              rng=None) -> TimingReport:
    """Wall time of one full discriminator round (fit_round on 2*S examples)
    as the per-round batch size S grows, with budget and minibatch size fixed.

    The machine is warmed until its budget is full before timing; the first
    rep per size is discarded as warm-up.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing and non-empty")
    if reps < 3:
        raise ValueError("reps must be >= 3")
    rng = rng or np.random.default_rng(0)
    machine = BudgetedKernelMachine(
        kernel=config.build_kernel(),
        budget=config.budget,
        step_size=config.step_size,
        reg_lambda=config.reg_lambda,
        loss=config.loss,
        margin=config.margin,
    )
    # fill the budget so every timed update runs at the full-budget cost
    chunk = config.clf_batch_size
    while len(machine) < machine.budget:
        x = rng.normal(size=(chunk, dim))
        y = np.where(rng.random(chunk) < 0.5, 1.0, -1.0)
        machine.update_minibatch(x, y)
    means, stds = [], []
    for s in sizes:
        reals = rng.normal(size=(s, dim))
        fakes = rng.normal(size=(s, dim))
        times = []
        for rep in range(reps + 1):
            t0 = time.perf_counter()
            machine.fit_round(reals, fakes, config.clf_batch_size, rng)
            elapsed = time.perf_counter() - t0
            if rep > 0:  # first rep is warm-up
                times.append(elapsed)
        means.append(float(np.mean(times)))
        stds.append(float(np.std(times)))
    return TimingReport(batch_sizes=sizes, mean_seconds=means,
                        std_seconds=stds, reps=reps)
