"""JSONL episode traces.

Line 1 is the versioned header; every following line is either a per-substep
vehicle record {t, vehicle_id, x, y, heading, speed, ego_action, reward,
event} or, for attention agents, a per-decision record {type: "attention",
t, ego_action, vehicle_ids, heads} with one weight row per head.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ContractError

TRACE_SCHEMA = "junctionlab-trace/v1"


def write_trace(path: str | Path, header: dict, records: list[dict]) -> None:
    payload = dict(header)
    payload["schema"] = TRACE_SCHEMA
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_trace(path: str | Path) -> tuple[dict, list[dict]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ContractError(f"{path}: empty trace")
    header = json.loads(lines[0])
    if header.get("schema") != TRACE_SCHEMA:
        raise ContractError(f"{path}: unknown trace schema {header.get('schema')!r}")
    return header, [json.loads(line) for line in lines[1:]]
