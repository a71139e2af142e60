"""Training-log CSV IO, evaluation reports, result tables, and curve plots."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from ..agents import TrainingRecord
from ..errors import ContractError
from ..metrics import (
    AggregateReport,
    MetricStats,
    format_mean_std,
    smooth_curve,
)
from .svgdraw import SvgCanvas, fmt

LOG_FIELDS = ("episode", "outcome", "total_reward", "epsilon", "loss")
AGENT_COLORS = {
    "dqn": "#555555",
    "attn-dqn-single": "#e6842a",
    "attn-dqn-multi": "#2a9d4e",
    "a2c": "#2a6fe6",
    "ppo": "#8e44ad",
}
METRIC_TITLES = (("collision", "Collision rate [%]"),
                 ("success", "Success rate [%]"),
                 ("freeze", "Freezing rate [%]"),
                 ("reward", "Total reward"))


def write_training_log(path: str | Path, records: list[TrainingRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_FIELDS)
        for r in records:
            writer.writerow([r.episode, r.outcome, f"{r.total_reward:.6f}",
                             f"{r.epsilon:.6f}",
                             "" if r.loss is None else f"{r.loss:.6f}"])


def read_training_log(path: str | Path) -> list[TrainingRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != LOG_FIELDS:
            raise ContractError(f"{path}: unexpected training-log columns")
        for row in reader:
            records.append(TrainingRecord(
                episode=int(row["episode"]), outcome=row["outcome"],
                total_reward=float(row["total_reward"]),
                epsilon=float(row["epsilon"]),
                loss=float(row["loss"]) if row["loss"] else None))
    return records


def outcome_series(records: list[TrainingRecord], window: int,
                   ) -> dict[str, list[float]]:
    """Smoothed per-episode curves: outcome rates in percent plus reward."""
    series = {
        "collision": [100.0 * (r.outcome == "collision") for r in records],
        "success": [100.0 * (r.outcome == "success") for r in records],
        "freeze": [100.0 * (r.outcome == "freeze") for r in records],
        "reward": [r.total_reward for r in records],
    }
    return {k: smooth_curve(v, window) for k, v in series.items()}


# ---------------------------------------------------------------------------
# evaluation reports
# ---------------------------------------------------------------------------

def write_eval_report(out_dir: str | Path, scenario: str, model: str,
                      report: AggregateReport, protocol: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for metric, stats in report.as_rows():
        rows.append({
            "scenario": scenario, "model": model, "metric": metric,
            "mean": f"{stats.mean:.4f}",
            "std": "" if stats.std is None else f"{stats.std:.4f}",
            "ci95": "" if stats.ci95 is None else f"{stats.ci95:.4f}",
            "cell": format_mean_std(stats),
        })
    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    payload = {
        "schema": "junctionlab-eval/v1",
        "scenario": scenario,
        "model": model,
        "protocol": protocol,
        "trials": report.trial_count,
        "metrics": {metric: {"mean": stats.mean, "std": stats.std,
                             "ci95": stats.ci95}
                    for metric, stats in report.as_rows()},
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2,
                                                sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# run discovery and tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunInfo:
    scenario: str
    agent: str
    seed: int
    records: list[TrainingRecord]


def discover_runs(root: str | Path) -> list[RunInfo]:
    runs = []
    for summary_path in sorted(Path(root).rglob("summary.json")):
        summary = json.loads(summary_path.read_text())
        log_path = summary_path.parent / "training_log.csv"
        if not log_path.exists():
            continue
        runs.append(RunInfo(scenario=summary["scenario"], agent=summary["agent"],
                            seed=int(summary["seed"]),
                            records=read_training_log(log_path)))
    return runs


def final_window_stats(records: list[TrainingRecord], window: int,
                       ) -> dict[str, float]:
    tail = records[-window:] if window < len(records) else records
    n = len(tail)
    return {
        "collision": 100.0 * sum(r.outcome == "collision" for r in tail) / n,
        "success": 100.0 * sum(r.outcome == "success" for r in tail) / n,
        "freeze": 100.0 * sum(r.outcome == "freeze" for r in tail) / n,
        "reward": sum(r.total_reward for r in tail) / n,
    }


def write_tables(out_path: str | Path, runs: list[RunInfo], window: int) -> None:
    """Tables-style CSV: per scenario/model, final-window metric cells."""
    from ..metrics import aggregate as _  # noqa: F401  (kept for symmetry)
    groups: dict[tuple[str, str], list[RunInfo]] = {}
    for run in runs:
        groups.setdefault((run.scenario, run.agent), []).append(run)
    rows = []
    for (scenario, agent), members in sorted(groups.items()):
        per_metric: dict[str, list[float]] = {}
        for run in members:
            for metric, value in final_window_stats(run.records, window).items():
                per_metric.setdefault(metric, []).append(value)
        for metric, values in per_metric.items():
            n = len(values)
            mean = sum(values) / n
            if n > 1:
                var = sum((v - mean) ** 2 for v in values) / (n - 1)
                std = var ** 0.5
                ci = 1.96 * std / n ** 0.5
            else:
                std = ci = None
            rows.append({
                "scenario": scenario, "model": agent, "metric": metric,
                "runs": n, "mean": f"{mean:.4f}",
                "std": "" if std is None else f"{std:.4f}",
                "ci95": "" if ci is None else f"{ci:.4f}",
                "cell": format_mean_std(MetricStats(mean, std, ci)),
            })
    if not rows:
        raise ContractError("no runs found to tabulate")
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# training-curve plots
# ---------------------------------------------------------------------------

def _panel(canvas: SvgCanvas, origin: tuple[float, float],
           size: tuple[float, float], title: str, x_max: float,
           y_range: tuple[float, float],
           curves: dict[str, tuple[list[float], list[float] | None]]) -> None:
    """One chart panel: mean polyline per agent plus optional CI band."""
    ox, oy = origin
    w, h = size
    y_lo, y_hi = y_range

    def sx(x: float) -> float:
        return ox + w * x / max(x_max, 1.0)

    def sy(y: float) -> float:
        return oy + h * (1.0 - (y - y_lo) / (y_hi - y_lo or 1.0))

    canvas.rect(ox, oy, w, h, "#fafbfc")
    for frac in (0.0, 0.5, 1.0):
        y = y_lo + frac * (y_hi - y_lo)
        canvas.raw(f'<line x1="{fmt(sx(0))}" y1="{fmt(sy(y))}" '
                   f'x2="{fmt(sx(x_max))}" y2="{fmt(sy(y))}" '
                   f'stroke="#dddddd" stroke-width="0.6"/>')
        canvas.raw(f'<text x="{fmt(ox - 4)}" y="{fmt(sy(y) + 1.5)}" '
                   f'font-size="5" text-anchor="end" fill="#666666" '
                   f'font-family="Helvetica,Arial,sans-serif">{y:g}</text>')
    for agent, (mean, band) in curves.items():
        color = AGENT_COLORS.get(agent, "#333333")
        xs = range(len(mean))
        if band is not None:
            upper = [(sx(x), sy(min(m + b, y_hi)))
                     for x, (m, b) in enumerate(zip(mean, band))]
            lower = [(sx(x), sy(max(m - b, y_lo)))
                     for x, (m, b) in enumerate(zip(mean, band))]
            pts = " ".join(f"{fmt(px)},{fmt(py)}" for px, py in
                           upper + lower[::-1])
            canvas.raw(f'<polygon points="{pts}" fill="{color}" '
                       f'fill-opacity="0.15"/>')
        pts = " ".join(f"{fmt(sx(x))},{fmt(sy(min(max(m, y_lo), y_hi)))}"
                       for x, m in zip(xs, mean))
        canvas.raw(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.2"/>')
    canvas.raw(f'<text x="{fmt(ox + w / 2)}" y="{fmt(oy - 4)}" font-size="7" '
               f'text-anchor="middle" fill="#222222" '
               f'font-family="Helvetica,Arial,sans-serif">{title}</text>')


def write_training_curves(out_path: str | Path, scenario: str,
                          runs: list[RunInfo], window: int) -> None:
    """Four-panel figure (collision, success, freezing, total reward) with a
    95% CI band across runs of the same agent."""
    groups: dict[str, list[RunInfo]] = {}
    for run in runs:
        if run.scenario == scenario:
            groups.setdefault(run.agent, []).append(run)
    if not groups:
        raise ContractError(f"no runs for scenario {scenario!r}")
    episodes = max(len(r.records) for members in groups.values()
                   for r in members)

    per_metric_curves: dict[str, dict[str, tuple[list[float], list[float] | None]]]
    per_metric_curves = {metric: {} for metric, _ in METRIC_TITLES}
    reward_lo, reward_hi = 0.0, 1.0
    for agent, members in sorted(groups.items()):
        all_series = [outcome_series(r.records, window) for r in members]
        n = len(all_series)
        for metric, _ in METRIC_TITLES:
            length = min(len(s[metric]) for s in all_series)
            mean = [sum(s[metric][i] for s in all_series) / n
                    for i in range(length)]
            band = None
            if n > 1:
                band = []
                for i in range(length):
                    mu = mean[i]
                    var = sum((s[metric][i] - mu) ** 2
                              for s in all_series) / (n - 1)
                    band.append(1.96 * var ** 0.5 / n ** 0.5)
            per_metric_curves[metric][agent] = (mean, band)
            if metric == "reward":
                reward_lo = min([reward_lo] + mean)
                reward_hi = max([reward_hi] + mean)

    canvas = SvgCanvas((0, 0, 520, 420), width=1040, height=840, flip_y=False)
    panel_w, panel_h = 220, 150
    positions = [(40, 30), (290, 30), (40, 240), (290, 240)]
    for (metric, title), (px, py) in zip(METRIC_TITLES, positions):
        y_range = (0.0, 100.0) if metric != "reward" else \
            (reward_lo - 1.0, reward_hi + 1.0)
        _panel(canvas, (px, py), (panel_w, panel_h),
               f"{scenario}: {title}", episodes, y_range,
               per_metric_curves[metric])
    legend_y = 415
    x = 40.0
    for agent in sorted(groups):
        color = AGENT_COLORS.get(agent, "#333333")
        canvas.raw(f'<rect x="{fmt(x)}" y="{fmt(legend_y - 6)}" width="10" '
                   f'height="4" fill="{color}"/>')
        canvas.raw(f'<text x="{fmt(x + 14)}" y="{fmt(legend_y)}" font-size="7" '
                   f'fill="#222222" font-family="Helvetica,Arial,sans-serif">'
                   f'{agent}</text>')
        x += 120.0
    Path(out_path).write_text(canvas.render())
