"""Episode bookkeeping and the four safety metrics.

Rates are kept as exact rationals so the residual identity
collision + success + freezing = 100 holds with no floating slack; rendering
rounds to two decimals in the table style "mean (std)".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractError

OUTCOMES = ("collision", "success", "freeze")


@dataclass(frozen=True)
class EpisodeRecord:
    outcome: str
    total_reward: float
    length: int
    seed: int

    def __post_init__(self) -> None:
        if self.outcome not in OUTCOMES:
            raise ContractError(f"unknown outcome {self.outcome!r}")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    # floats go through their shortest decimal repr, so 56.88 means 56.88
    return Fraction(str(value))


def freezing_residual(collision, success) -> Fraction:
    """freezing = 100% - collision - success, computed exactly."""
    return Fraction(100) - _as_fraction(collision) - _as_fraction(success)


@dataclass(frozen=True)
class TrialSummary:
    episode_count: int
    collision_rate: Fraction
    success_rate: Fraction
    freezing_rate: Fraction
    mean_total_reward: float

    def rates(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.collision_rate, self.success_rate, self.freezing_rate)


def compute_rates(records: list[EpisodeRecord]) -> TrialSummary:
    """Collision/success percentages counted directly; freezing as the exact
    residual."""
    if not records:
        raise ContractError("cannot compute rates over an empty episode list")
    n = len(records)
    collisions = sum(1 for r in records if r.outcome == "collision")
    successes = sum(1 for r in records if r.outcome == "success")
    collision = Fraction(100 * collisions, n)
    success = Fraction(100 * successes, n)
    return TrialSummary(
        episode_count=n,
        collision_rate=collision,
        success_rate=success,
        freezing_rate=freezing_residual(collision, success),
        mean_total_reward=sum(r.total_reward for r in records) / n,
    )


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float | None      # None with fewer than two trials
    ci95: float | None     # normal-approximation half-width 1.96*std/sqrt(n)


@dataclass(frozen=True)
class AggregateReport:
    trial_count: int
    collision: MetricStats
    success: MetricStats
    freezing: MetricStats
    total_reward: MetricStats

    def as_rows(self) -> list[tuple[str, MetricStats]]:
        return [("collision_rate", self.collision),
                ("success_rate", self.success),
                ("freezing_rate", self.freezing),
                ("total_reward", self.total_reward)]


def _stats(values: list[float]) -> MetricStats:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return MetricStats(mean, None, None)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    std = math.sqrt(var)
    return MetricStats(mean, std, 1.96 * std / math.sqrt(n))


def aggregate(trials: list[TrialSummary]) -> AggregateReport:
    """Sample mean / std (n-1) / 95% CI half-width across trials; a single
    trial yields the mean with dispersion flagged absent."""
    if not trials:
        raise ContractError("cannot aggregate zero trials")
    return AggregateReport(
        trial_count=len(trials),
        collision=_stats([float(t.collision_rate) for t in trials]),
        success=_stats([float(t.success_rate) for t in trials]),
        freezing=_stats([float(t.freezing_rate) for t in trials]),
        total_reward=_stats([t.mean_total_reward for t in trials]),
    )


def format_mean_std(stats: MetricStats) -> str:
    """Table-cell style: '56.88 (5.39)', two decimals."""
    std = 0.0 if stats.std is None else stats.std
    return f"{stats.mean:.2f} ({std:.2f})"


def smooth_curve(series: list[float], window: int) -> list[float]:
    """Trailing moving average; the window shrinks near the start so the
    output length equals the input length."""
    if window < 1:
        raise ContractError("window must be >= 1")
    out: list[float] = []
    acc = 0.0
    for i, value in enumerate(series):
        acc += value
        if i >= window:
            acc -= series[i - window]
        out.append(acc / min(i + 1, window))
    return out
