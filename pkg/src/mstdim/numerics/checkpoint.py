"""Checkpoint container: magic string, textual manifest, raw little-endian payloads.

Round-trips are bit-exact. The manifest is a single JSON line listing
(name, shape, dtype, byte offset) per tensor plus free-form metadata.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import IngestionError

MAGIC = b"MSTDIM1"

_DTYPES = {"<f4", "<f8", "|u1", "<i8", "<u4"}


def _dtype_tag(a: np.ndarray) -> str:
    tag = a.dtype.str
    if tag == "|u1" or tag in _DTYPES:
        return tag
    raise IngestionError(f"checkpoint: unsupported dtype {a.dtype}")


def save_checkpoint(path: str | Path, tensors: dict[str, np.ndarray], meta: dict | None = None) -> None:
    path = Path(path)
    entries = []
    offset = 0
    blobs = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        blob = arr.tobytes()
        entries.append(
            {"name": name, "shape": list(arr.shape), "dtype": _dtype_tag(arr), "offset": offset}
        )
        offset += len(blob)
        blobs.append(blob)
    manifest = json.dumps({"meta": meta or {}, "tensors": entries}, sort_keys=True)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC + b"\n")
        f.write(manifest.encode("utf-8") + b"\n")
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.readline().rstrip(b"\n")
        if magic != MAGIC:
            raise IngestionError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        try:
            manifest = json.loads(f.readline().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise IngestionError(f"{path}: unreadable manifest ({e})") from e
        payload = f.read()
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest.get("tensors", []):
        for key in ("name", "shape", "dtype", "offset"):
            if key not in entry:
                raise IngestionError(f"{path}: manifest entry missing field '{key}'")
        dt = np.dtype(entry["dtype"])
        shape = tuple(int(s) for s in entry["shape"])
        nbytes = dt.itemsize * int(np.prod(shape)) if shape else dt.itemsize
        start = int(entry["offset"])
        if start + nbytes > len(payload):
            raise IngestionError(
                f"{path}: tensor '{entry['name']}' payload exceeds file size"
            )
        arr = np.frombuffer(payload[start : start + nbytes], dtype=dt).reshape(shape)
        tensors[entry["name"]] = arr.copy()
    return tensors, manifest.get("meta", {})
