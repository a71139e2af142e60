"""Safety-metric laws: the exact residual identity, published-row checks,
aggregation statistics, CI coverage, and curve smoothing."""

from fractions import Fraction

import numpy as np
import pytest

from junctionlab.errors import ContractError
from junctionlab.metrics import (
    EpisodeRecord,
    TrialSummary,
    aggregate,
    compute_rates,
    format_mean_std,
    freezing_residual,
    smooth_curve,
)


def _records(collisions, successes, freezes):
    records = []
    for outcome, count in (("collision", collisions), ("success", successes),
                           ("freeze", freezes)):
        records += [EpisodeRecord(outcome, 1.0, 13, seed=i)
                    for i in range(count)]
    return records


def test_published_intersection_row_residual():
    assert freezing_residual("56.88", "29.23") == Fraction("13.89")


def test_published_roundabout_row_residual():
    assert freezing_residual("14.7", "33.99") == Fraction("51.31")


def test_all_collisions_rates():
    summary = compute_rates(_records(25, 0, 0))
    assert summary.rates() == (Fraction(100), Fraction(0), Fraction(0))


def test_identity_exact_over_random_lists():
    rng = np.random.default_rng(0)
    for _ in range(300):
        counts = rng.multinomial(int(rng.integers(1, 200)), [1/3, 1/3, 1/3])
        summary = compute_rates(_records(*counts))
        assert sum(summary.rates()) == Fraction(100)


def test_rates_permutation_invariant():
    rng = np.random.default_rng(1)
    records = _records(7, 5, 3)
    shuffled = list(records)
    rng.shuffle(shuffled)
    assert compute_rates(records).rates() == compute_rates(shuffled).rates()


def test_empty_record_list_rejected():
    with pytest.raises(ContractError):
        compute_rates([])


def test_unknown_outcome_rejected():
    with pytest.raises(ContractError):
        EpisodeRecord("wandered-off", 0.0, 1, 0)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def _trial(collision_pct: int, n=100) -> TrialSummary:
    records = _records(collision_pct, 0, n - collision_pct)
    return compute_rates(records)


def test_aggregate_textbook_mean_std():
    report = aggregate([_trial(10), _trial(20), _trial(30)])
    assert report.collision.mean == pytest.approx(20.0)
    assert report.collision.std == pytest.approx(10.0)
    assert report.collision.ci95 == pytest.approx(1.96 * 10.0 / np.sqrt(3))


def test_aggregate_identical_trials_zero_dispersion():
    report = aggregate([_trial(15)] * 4)
    assert report.collision.std == 0.0
    assert report.collision.ci95 == 0.0


def test_aggregate_single_trial_flags_dispersion_absent():
    report = aggregate([_trial(40)])
    assert report.collision.mean == pytest.approx(40.0)
    assert report.collision.std is None
    assert report.collision.ci95 is None


def test_aggregate_mean_within_range():
    trials = [_trial(c) for c in (5, 35, 60, 10)]
    report = aggregate(trials)
    values = [float(t.collision_rate) for t in trials]
    assert min(values) <= report.collision.mean <= max(values)


def test_ci_coverage_monte_carlo():
    """95% normal-approximation CI over 100 Bernoulli trials covers the true
    rate in about 95% of 1000 meta-repetitions."""
    rng = np.random.default_rng(2024)
    true_rate = 30.0
    covered = 0
    reps = 1000
    for _ in range(reps):
        samples = rng.binomial(100, true_rate / 100.0, size=100).astype(float)
        mean = samples.mean()
        std = samples.std(ddof=1)
        half = 1.96 * std / np.sqrt(100)
        covered += int(mean - half <= true_rate <= mean + half)
    assert 0.92 <= covered / reps <= 0.975


def test_format_mean_std_two_decimals():
    report = aggregate([_trial(50), _trial(63)])
    cell = format_mean_std(report.collision)
    assert cell == f"{report.collision.mean:.2f} ({report.collision.std:.2f})"
    assert cell.count(".") == 2


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------

def test_smooth_window_one_identity():
    series = [3.0, -1.0, 2.5, 0.0]
    assert smooth_curve(series, 1) == series


def test_smooth_constant_unchanged():
    assert smooth_curve([2.0] * 10, 4) == [2.0] * 10


def test_smooth_ramp_trailing_average():
    series = [float(i) for i in range(1, 11)]
    smoothed = smooth_curve(series, 3)
    assert len(smoothed) == 10
    assert smoothed[-1] == pytest.approx(9.0)   # mean(8, 9, 10)
    assert smoothed[0] == 1.0                    # shrunk window at the start
    assert smoothed[1] == pytest.approx(1.5)


def test_smooth_rejects_bad_window():
    with pytest.raises(ContractError):
        smooth_curve([1.0], 0)
