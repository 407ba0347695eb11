"""2D Gaussian-mixture benchmark datasets and flat-vector dataset I/O.

Presets: grid25, grid49 (lattices over [-4, 4]^2, sigma 0.05), ring8 (radius 1,
sigma 0.01), circle (100 components on a radius-2 circle plus a triple-weight
center component, sigma 0.05).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDatasetError, NonNumericError, RaggedRowsError

PRESET_NAMES = ("grid25", "grid49", "ring8", "circle")

_VEC_MAGIC = b"OKVD"


@dataclass
class GaussianMixtureSpec:
    """Isotropic Gaussian mixture with one metric mode per distinct center.

    `component_count` records the raw construction size when coincident
    components were merged into one mode (the circle preset's 3-at-center).
    """

    centers: np.ndarray          # (M, d)
    sigmas: np.ndarray           # (M,)
    weights: np.ndarray          # (M,)
    kind: str = "custom"
    component_count: int = 0     # 0 means "same as number of modes"

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        m = self.centers.shape[0]
        if self.centers.ndim != 2 or m < 1:
            raise ValueError("centers must be a non-empty (M, d) array")
        if self.sigmas.shape != (m,) or self.weights.shape != (m,):
            raise ValueError("sigmas and weights must have one entry per mode")
        if np.any(self.sigmas <= 0):
            raise ValueError("sigmas must be > 0")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be > 0")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        diffs = self.centers[:, None, :] - self.centers[None, :, :]
        dist = np.sqrt((diffs ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        if dist.min() == 0.0:
            raise ValueError("centers must be distinct")
        if self.component_count == 0:
            self.component_count = m
        for arr in (self.centers, self.sigmas, self.weights):
            arr.setflags(write=False)

    @property
    def n_modes(self):
        return self.centers.shape[0]

    @property
    def dim(self):
        return self.centers.shape[1]


def make_grid(modes_per_side: int, extent: float = 4.0,
              sigma: float = 0.05) -> GaussianMixtureSpec:
    """Equally weighted lattice of modes_per_side^2 modes over [-extent, extent]^2."""
    if modes_per_side < 2:
        raise ValueError("modes_per_side must be >= 2")
    axis = np.linspace(-extent, extent, modes_per_side)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    centers = np.column_stack([xx.ravel(), yy.ravel()])
    m = modes_per_side ** 2
    kind = {5: "grid25", 7: "grid49"}.get(modes_per_side, "custom")
    return GaussianMixtureSpec(centers=centers,
                               sigmas=np.full(m, float(sigma)),
                               weights=np.full(m, 1.0 / m),
                               kind=kind)


def make_ring(n_modes: int, radius: float = 1.0,
              sigma: float = 0.01) -> GaussianMixtureSpec:
    """Equally weighted modes at angles 2*pi*i/n on a circle; mode 0 sits at
    (radius, 0), counterclockwise."""
    if n_modes < 2:
        raise ValueError("n_modes must be >= 2")
    angles = 2.0 * np.pi * np.arange(n_modes) / n_modes
    centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return GaussianMixtureSpec(centers=centers,
                               sigmas=np.full(n_modes, float(sigma)),
                               weights=np.full(n_modes, 1.0 / n_modes),
                               kind="ring8" if n_modes == 8 else "custom")


def make_circle() -> GaussianMixtureSpec:
    """100 components on the radius-2 circle plus three coincident components
    at the origin, all sigma 0.05 and equally weighted. The three center
    components merge into a single metric mode of weight 3/103."""
    n_ring = 100
    angles = 2.0 * np.pi * np.arange(n_ring) / n_ring
    ring = 2.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    centers = np.vstack([ring, np.zeros((1, 2))])
    weights = np.concatenate([np.full(n_ring, 1.0 / 103.0), [3.0 / 103.0]])
    return GaussianMixtureSpec(centers=centers,
                               sigmas=np.full(n_ring + 1, 0.05),
                               weights=weights,
                               kind="circle",
                               component_count=103)


def preset(name: str) -> GaussianMixtureSpec:
    if name == "grid25":
        return make_grid(5, 4.0, 0.05)
    if name == "grid49":
        return make_grid(7, 4.0, 0.05)
    if name == "ring8":
        return make_ring(8, 1.0, 0.01)
    if name == "circle":
        return make_circle()
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def sample(spec: GaussianMixtureSpec, rng: np.random.Generator,
           n: int) -> np.ndarray:
    """n draws: pick a mode by weight, add isotropic N(0, sigma^2) noise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = rng.choice(spec.n_modes, size=n, p=spec.weights)
    noise = rng.normal(size=(n, spec.dim))
    return spec.centers[idx] + noise * spec.sigmas[idx][:, None]


# ---------------------------------------------------------------------------
# Flat-vector datasets (encoder path)

@dataclass
class VectorDataset:
    """N x d matrix of flat examples."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("samples must be a non-empty (N, d) matrix")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]

    def minibatch(self, rng, size):
        idx = rng.integers(0, self.n, size=size)
        return self.samples[idx]


def _rescale_unit(x):
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return 2.0 * (x - lo) / (hi - lo) - 1.0


def _load_csv_rows(path):
    rows = []
    width = None
    first = True
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if first:
                first = False
                # only the leading row may be a (non-numeric) header
                try:
                    parsed = [float(tok) for tok in row]
                except ValueError:
                    continue
                width = len(parsed)
                rows.append(parsed)
                continue
            if width is not None and len(row) != width:
                raise RaggedRowsError(
                    f"{path}: row {line_no} has {len(row)} columns, expected {width}")
            try:
                rows.append([float(tok) for tok in row])
            except ValueError as exc:
                raise NonNumericError(f"{path}: row {line_no}: {exc}") from None
            if width is None:
                width = len(rows[-1])
    return rows


def load_vectors(path, rescale: bool = False) -> VectorDataset:
    """Load a dataset from CSV or the binary vector format (sniffed by magic).

    Raises FileNotFoundError, RaggedRowsError, NonNumericError, or
    EmptyDatasetError as appropriate.
    """
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == _VEC_MAGIC:
        data = _load_binary(path)
    else:
        rows = _load_csv_rows(path)
        if not rows:
            raise EmptyDatasetError(f"{path}: no data rows")
        data = np.asarray(rows, dtype=np.float64)
    if data.size == 0:
        raise EmptyDatasetError(f"{path}: no data rows")
    if rescale:
        data = _rescale_unit(data)
    return VectorDataset(samples=data)


def _load_binary(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    header = struct.calcsize("<4sQQ")
    if len(blob) < header:
        raise EmptyDatasetError(f"{path}: truncated header")
    magic, n, d = struct.unpack_from("<4sQQ", blob)
    expected = header + n * d * 8
    if magic != _VEC_MAGIC or len(blob) != expected:
        raise NonNumericError(f"{path}: corrupt binary vector file")
    if n == 0 or d == 0:
        raise EmptyDatasetError(f"{path}: no data rows")
    flat = np.frombuffer(blob, dtype="<f8", count=n * d, offset=header)
    return flat.reshape(n, d).astype(np.float64)


def save_vectors(path, data) -> None:
    """Write a matrix as CSV (paths ending .csv) or the binary format."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("expected an (N, d) matrix")
    if str(path).endswith(".csv"):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(data.shape[1])])
            for row in data:
                writer.writerow([repr(float(v)) for v in row])
    else:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sQQ", _VEC_MAGIC, data.shape[0], data.shape[1]))
            fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())
