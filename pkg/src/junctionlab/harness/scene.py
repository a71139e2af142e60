"""Scenario frame rendering: roads, vehicles, and attention lines.

Frames are pure functions of trace content, so re-rendering a stored trace
reproduces byte-identical SVGs.  Attention is drawn as one line set per head
(green and blue) from the ego to each attended vehicle, stroke width
proportional to the weight; the ego's self-attention shows as a ring.
"""

from __future__ import annotations

import math

from ..envs import ScenarioConfig
from ..envs.scenario import make_scenario
from .svgdraw import SvgCanvas

HEAD_COLORS = ("#2a9d4e", "#2a6fe6")     # green, blue
EGO_COLOR = "#1d8348"
OTHER_COLOR = "#7f8c9b"
CRASHED_COLOR = "#c0392b"
ROAD_COLOR = "#d5d9de"
ATTENTION_WIDTH_SCALE = 6.0


def _road_canvas(kind: str) -> tuple[SvgCanvas, tuple[float, float, float, float]]:
    scenario = make_scenario(ScenarioConfig.defaults(kind))
    canvas = SvgCanvas(scenario.view_box)
    dump = scenario.network.polyline_dump(step=2.0)
    for lane in dump["lanes"]:
        canvas.polyline([(p[0], p[1]) for p in lane["points"]], ROAD_COLOR,
                        lane["width"], opacity=0.9)
    for lane in dump["lanes"]:
        canvas.polyline([(p[0], p[1]) for p in lane["points"]], "#b9bfc7", 0.3)
    return canvas, scenario.view_box


def render_frame(kind: str, vehicles: list[dict],
                 attention: dict | None = None,
                 caption: str = "") -> str:
    """One SVG frame.

    ``vehicles``: dicts with vehicle_id, x, y, heading, speed (ego id 0).
    ``attention``: optional {vehicle_ids: [...], heads: [[w...], [w...]]}.
    """
    canvas, view_box = _road_canvas(kind)
    by_id = {v["vehicle_id"]: v for v in vehicles}
    ego = by_id.get(0)
    if attention and ego is not None:
        for head_idx, weights in enumerate(attention["heads"]):
            color = HEAD_COLORS[head_idx % len(HEAD_COLORS)]
            for vid, weight in zip(attention["vehicle_ids"], weights):
                if weight <= 1e-4:
                    continue
                if vid == 0:
                    canvas.circle(ego["x"], ego["y"], 4.0 + head_idx, color,
                                  weight * ATTENTION_WIDTH_SCALE)
                    continue
                other = by_id.get(vid)
                if other is None:
                    continue
                canvas.line(ego["x"], ego["y"], other["x"], other["y"], color,
                            weight * ATTENTION_WIDTH_SCALE, opacity=0.85)
    for vehicle in vehicles:
        if vehicle["vehicle_id"] == 0:
            fill = EGO_COLOR
        elif vehicle.get("event") == "crashed" or vehicle.get("speed", 1.0) < 0.0:
            fill = CRASHED_COLOR
        else:
            fill = OTHER_COLOR
        canvas.oriented_rect(vehicle["x"], vehicle["y"], 5.0, 2.0,
                             math.degrees(vehicle["heading"]), fill)
    if caption:
        min_x, min_y, box_w, box_h = view_box
        canvas.text(min_x + 5.0, min_y + box_h - 8.0, caption, size=6.0)
    return canvas.render()


def frames_from_trace(header: dict, records: list[dict]) -> list[tuple[str, str]]:
    """(filename, svg) per decision step, rendered purely from trace data."""
    kind = header["scenario"]
    vehicle_rows: dict[float, list[dict]] = {}
    attention_at: dict[float, dict] = {}
    for record in records:
        if record.get("type") == "attention":
            attention_at[record["t"]] = record
        else:
            vehicle_rows.setdefault(record["t"], []).append(record)
    frames = []
    decision_times = sorted(attention_at) if attention_at else \
        [t for t in sorted(vehicle_rows) if abs(t - round(t)) < 1e-9]
    for index, t in enumerate(decision_times):
        if t not in vehicle_rows:
            continue
        svg = render_frame(kind, vehicle_rows[t], attention_at.get(t),
                           caption=f"t={t:.0f}s")
        frames.append((f"step_{index:03d}.svg", svg))
    return frames
