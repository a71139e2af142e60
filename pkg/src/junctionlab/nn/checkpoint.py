"""Versioned binary checkpoints.

Layout: magic ``JLCK`` | u32 format version | u32 header length | UTF-8 JSON
header | concatenated raw little-endian float32 tensors.  The header carries
arbitrary metadata (model width/heads/d_k/query-mode, agent kind and state)
plus the ordered tensor directory with shapes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError

MAGIC = b"JLCK"
FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, meta: dict,
                    tensors: dict[str, np.ndarray]) -> None:
    directory = [{"name": name, "shape": list(arr.shape)}
                 for name, arr in tensors.items()]
    header = json.dumps({"format_version": FORMAT_VERSION, "meta": meta,
                         "tensors": directory},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        for arr in tensors.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header") from exc
    offset = 12 + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        size = count * 4
        chunk = raw[offset:offset + size]
        if len(chunk) != size:
            raise CheckpointError(f"{path}: truncated tensor {entry['name']}")
        tensors[entry["name"]] = np.frombuffer(chunk, dtype="<f4").reshape(shape)
        offset += size
    return header["meta"], tensors
