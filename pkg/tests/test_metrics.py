import math

import numpy as np
import pytest

from okgan.metrics import (center_captured, count_modes, evaluate,
                           high_quality_pct, reverse_kl)
from okgan.synthdata import GaussianMixtureSpec, preset, sample


# ---------------------------------------------------------------------------
# Naive reference implementations (the oracles)

def naive_metrics(samples, spec):
    """Scalar-loop versions of all three metrics, same arithmetic per pair."""
    n, m = len(samples), spec.n_modes
    dist = [[math.sqrt(sum((samples[i][k] - spec.centers[j][k]) ** 2
                           for k in range(spec.dim)))
             for j in range(m)] for i in range(n)]
    modes = 0
    for j in range(m):
        if min(dist[i][j] for i in range(n)) < 3.0 * spec.sigmas[j]:
            modes += 1
    hq = 0
    assign = []
    for i in range(n):
        j_best = min(range(m), key=lambda j: dist[i][j])  # ties: lowest index
        assign.append(j_best)
        if dist[i][j_best] < 3.0 * spec.sigmas[j_best]:
            hq += 1
    counts = [0] * m
    for j in assign:
        counts[j] += 1
    kl = 0.0
    for j in range(m):
        q = counts[j] / n
        if q > 0:
            kl += q * math.log(q / spec.weights[j])
    return modes, 100.0 * hq / n, kl


def small_spec(rng, n_modes):
    centers = rng.normal(size=(n_modes, 2)) * 3
    while True:  # keep centers distinct
        d = np.linalg.norm(centers[:, None] - centers[None], axis=2)
        np.fill_diagonal(d, np.inf)
        if d.min() > 1e-3:
            break
        centers = rng.normal(size=(n_modes, 2)) * 3
    weights = rng.random(n_modes) + 0.1
    weights /= weights.sum()
    weights[-1] = 1.0 - weights[:-1].sum()  # exact sum
    return GaussianMixtureSpec(centers=centers,
                               sigmas=rng.random(n_modes) * 0.3 + 0.05,
                               weights=weights)


def test_metrics_match_naive_oracle_exactly(rng):
    for _ in range(60):
        spec = small_spec(rng, int(rng.integers(1, 6)))
        samples = rng.normal(size=(int(rng.integers(1, 51)), 2)) * 4
        want = naive_metrics(samples, spec)
        assert count_modes(samples, spec) == want[0]
        assert high_quality_pct(samples, spec) == want[1]
        assert reverse_kl(samples, spec) == want[2]


# ---------------------------------------------------------------------------
# count_modes

def test_all_grid_centers_hit():
    spec = preset("grid25")
    assert count_modes(spec.centers.copy(), spec) == 25


def test_samples_at_one_center_count_one():
    spec = preset("grid25")
    samples = np.tile(spec.centers[7], (40, 1))
    assert count_modes(samples, spec) == 1


def test_boundary_is_strict():
    # binary-exact sigma so 3*sigma is representable: 3*0.0625 = 0.1875
    spec = GaussianMixtureSpec(centers=np.array([[0.0, 0.0], [10.0, 0.0]]),
                               sigmas=np.array([0.0625, 0.0625]),
                               weights=np.array([0.5, 0.5]))
    at_boundary = np.array([[0.1875, 0.0]])
    assert count_modes(at_boundary, spec) == 0
    just_inside = np.array([[0.18749999, 0.0]])
    assert count_modes(just_inside, spec) == 1


# ---------------------------------------------------------------------------
# high_quality_pct

def test_hq_all_at_centers_is_100():
    spec = preset("grid25")
    assert high_quality_pct(spec.centers.copy(), spec) == 100.0


def test_hq_origin_vs_offset_grid():
    spec = preset("grid25")
    assert high_quality_pct(np.zeros((10, 2)), spec) == 100.0  # (0,0) is a center
    assert high_quality_pct(np.ones((10, 2)), spec) == 0.0     # (1,1) is sqrt(2) away


def test_hq_half_and_half():
    spec = preset("grid25")
    good = np.tile(spec.centers[0], (5, 1))
    bad = np.tile(spec.centers[0] + 1.0, (5, 1))
    assert high_quality_pct(np.vstack([good, bad]), spec) == 50.0


# ---------------------------------------------------------------------------
# reverse_kl

def test_reverse_kl_zero_for_matching_frequencies():
    spec = preset("grid25")
    samples = np.repeat(spec.centers, 4, axis=0)  # 4 per mode, uniform
    assert reverse_kl(samples, spec) == 0.0


def test_reverse_kl_collapse_closed_form():
    spec = preset("grid25")
    samples = np.tile(spec.centers[12], (2500, 1))
    assert abs(reverse_kl(samples, spec) - math.log(25)) < 1e-9


def test_reverse_kl_two_mode_closed_form():
    spec = GaussianMixtureSpec(centers=np.array([[0.0, 0.0], [4.0, 0.0]]),
                               sigmas=np.array([0.1, 0.1]),
                               weights=np.array([0.5, 0.5]))
    samples = np.vstack([np.tile([0.0, 0.0], (750, 1)),
                         np.tile([4.0, 0.0], (250, 1))])
    want = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)  # 0.130812...
    assert abs(reverse_kl(samples, spec) - want) < 1e-9


def test_reverse_kl_log_base_flag():
    spec = preset("grid25")
    samples = np.tile(spec.centers[0], (100, 1))
    nats = reverse_kl(samples, spec)
    bits = reverse_kl(samples, spec, base=2.0)
    assert abs(bits - nats / math.log(2)) < 1e-12


def test_reverse_kl_exclude_low_quality_flag():
    spec = GaussianMixtureSpec(centers=np.array([[0.0, 0.0], [4.0, 0.0]]),
                               sigmas=np.array([0.1, 0.1]),
                               weights=np.array([0.5, 0.5]))
    # one far outlier assigned to mode 0 under the default rule
    samples = np.vstack([np.tile([0.0, 0.0], (50, 1)),
                         np.tile([4.0, 0.0], (50, 1)),
                         [[1.9, 0.0]]])
    assert reverse_kl(samples, spec, exclude_low_quality=True) == 0.0
    assert reverse_kl(samples, spec) > 0.0


def test_reverse_kl_nonnegative_random(rng):
    spec = preset("ring8")
    for _ in range(20):
        samples = rng.normal(size=(200, 2)) * 2
        assert reverse_kl(samples, spec) >= 0.0


# ---------------------------------------------------------------------------
# center_captured

def test_center_captured_cases():
    spec = preset("circle")
    assert center_captured(np.array([[0.0, 0.0]]), spec) == 1
    ring_only = 2.0 * np.column_stack([np.cos(np.linspace(0, 6, 50)),
                                       np.sin(np.linspace(0, 6, 50))])
    assert center_captured(ring_only, spec) == 0
    # strict boundary: 3 * 0.05 = 0.15000000000000002 as a float
    boundary = np.array([[3.0 * 0.05, 0.0]])
    assert center_captured(boundary, spec) == 0


def test_center_captured_requires_circle():
    with pytest.raises(ValueError):
        center_captured(np.zeros((3, 2)), preset("grid25"))


# ---------------------------------------------------------------------------
# invariances and the aggregate report

def test_permutation_invariance(rng):
    spec = small_spec(rng, 4)
    samples = rng.normal(size=(30, 2)) * 3
    perm = rng.permutation(30)
    assert count_modes(samples, spec) == count_modes(samples[perm], spec)
    assert high_quality_pct(samples, spec) == high_quality_pct(samples[perm], spec)
    assert reverse_kl(samples, spec) == reverse_kl(samples[perm], spec)


def test_rotation_invariance(rng):
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    spec = small_spec(rng, 4)
    rotated = GaussianMixtureSpec(centers=spec.centers @ rot.T,
                                  sigmas=spec.sigmas.copy(),
                                  weights=spec.weights.copy())
    samples = rng.normal(size=(40, 2)) * 3
    assert count_modes(samples, spec) == count_modes(samples @ rot.T, rotated)
    assert abs(high_quality_pct(samples, spec)
               - high_quality_pct(samples @ rot.T, rotated)) < 1e-9
    assert abs(reverse_kl(samples, spec)
               - reverse_kl(samples @ rot.T, rotated)) < 1e-9


def test_evaluate_perfect_generator(rng):
    # sampling from the target itself must look near-perfect
    spec = preset("grid25")
    samples = sample(spec, rng, 2500)
    report = evaluate(samples, spec, round_index=3)
    assert report.modes_captured == 25
    assert report.high_quality_pct >= 98.0   # 3 sigma covers ~98.9% in 2D
    assert report.reverse_kl <= 0.02         # multinomial fluctuation only
    assert report.center_captured is None
    assert report.n_samples == 2500
    assert report.round == 3


def test_evaluate_far_samples(rng):
    spec = preset("grid25")
    report = evaluate(np.full((100, 2), 50.0), spec)
    assert report.modes_captured == 0
    assert report.high_quality_pct == 0.0
    assert report.reverse_kl > 0  # still defined via nearest-mode assignment


def test_evaluate_circle_includes_center_flag(rng):
    spec = preset("circle")
    report = evaluate(sample(spec, rng, 2500), spec)
    assert report.center_captured == 1
    assert report.total_modes == 101


def test_report_json_keys(rng):
    spec = preset("circle")
    report = evaluate(sample(spec, rng, 100), spec)
    payload = report.to_dict()
    for key in ("modes_captured", "high_quality_pct", "reverse_kl",
                "center_captured", "n_samples", "total_modes", "round"):
        assert key in payload
