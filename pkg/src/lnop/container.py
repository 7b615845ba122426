"""Little-endian binary container shared by datasets and model checkpoints.

Dataset layout (version 1)::

    b"LNOP" | u32 version | u32 samples | u32 rank | u32 extents[rank]
            | u32 in_channels | u32 out_channels
            | f64 payload: for each sample, input (c_in, *extents) then target (c_out, *extents)

Tensor-bundle layout (version 2, checkpoints)::

    b"LNOP" | u32 version | u32 count | per tensor: u32 rank, u32 extents[rank]
            | f64 payload: tensors back to back in header order

Each file has a JSON sidecar at ``<path>.json``.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"LNOP"
DATASET_VERSION = 1
BUNDLE_VERSION = 2

_F64 = np.dtype("<f8")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Reader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def u32(self, what: str) -> int:
        if self.pos + 4 > len(self.buf):
            raise FormatError(f"{self.path}: truncated header reading {what} at byte offset {self.pos}")
        (val,) = struct.unpack_from("<I", self.buf, self.pos)
        self.pos += 4
        return val

    def f64(self, count: int) -> np.ndarray:
        nbytes = count * 8
        if self.pos + nbytes > len(self.buf):
            raise FormatError(
                f"{self.path}: truncated payload at byte offset {len(self.buf)}; "
                f"expected {self.pos + nbytes} bytes"
            )
        arr = np.frombuffer(self.buf, dtype=_F64, count=count, offset=self.pos)
        self.pos += nbytes
        return arr.astype(np.float64)


def _open(path, version: int) -> _Reader:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc})") from exc
    r = _Reader(buf, path)
    if buf[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {buf[:4]!r} at byte offset 0, expected {MAGIC!r}")
    r.pos = 4
    found = r.u32("version")
    if found != version:
        raise FormatError(f"{path}: container version {found} at byte offset 4, expected {version}")
    return r


def _write_sidecar(path, meta: dict) -> None:
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_sidecar(path) -> dict:
    p = sidecar_path(path)
    try:
        return json.loads(p.read_text())
    except FileNotFoundError:
        return {}
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: invalid JSON sidecar ({exc})") from exc


def write_pairs(path, inputs: np.ndarray, targets: np.ndarray, meta: dict) -> None:
    """Write stacked (samples, c, *extents) input and target arrays."""
    inputs = np.ascontiguousarray(inputs, dtype=_F64)
    targets = np.ascontiguousarray(targets, dtype=_F64)
    if inputs.shape[0] != targets.shape[0] or inputs.shape[2:] != targets.shape[2:]:
        raise FormatError(f"inputs {inputs.shape} and targets {targets.shape} are not paired")
    extents = inputs.shape[2:]
    header = struct.pack(
        f"<4sIII{len(extents)}III",
        MAGIC, DATASET_VERSION, inputs.shape[0], len(extents), *extents, inputs.shape[1], targets.shape[1],
    )
    flat_in = inputs.reshape(inputs.shape[0], -1)
    flat_out = targets.reshape(targets.shape[0], -1)
    payload = np.concatenate([flat_in, flat_out], axis=1)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())
    _write_sidecar(path, meta)


def read_pairs(path) -> tuple[np.ndarray, np.ndarray, dict]:
    r = _open(path, DATASET_VERSION)
    count = r.u32("sample count")
    rank = r.u32("rank")
    extents = tuple(r.u32(f"extent {i}") for i in range(rank))
    c_in = r.u32("input channels")
    c_out = r.u32("target channels")
    cells = int(np.prod(extents, dtype=np.int64))
    payload = r.f64(count * (c_in + c_out) * cells).reshape(count, (c_in + c_out) * cells)
    if r.pos != len(r.buf):
        raise FormatError(f"{path}: {len(r.buf) - r.pos} trailing bytes after byte offset {r.pos}")
    inputs = payload[:, : c_in * cells].reshape(count, c_in, *extents)
    targets = payload[:, c_in * cells:].reshape(count, c_out, *extents)
    return inputs, targets, read_sidecar(path)


def write_bundle(path, tensors: list[np.ndarray], meta: dict) -> None:
    parts = [struct.pack("<4sII", MAGIC, BUNDLE_VERSION, len(tensors))]
    for t in tensors:
        parts.append(struct.pack(f"<I{t.ndim}I", t.ndim, *t.shape))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
        for t in tensors:
            fh.write(np.ascontiguousarray(t, dtype=_F64).tobytes())
    _write_sidecar(path, meta)


def read_bundle(path) -> tuple[list[np.ndarray], dict]:
    r = _open(path, BUNDLE_VERSION)
    count = r.u32("tensor count")
    shapes = []
    for i in range(count):
        rank = r.u32(f"rank of tensor {i}")
        shapes.append(tuple(r.u32(f"extent of tensor {i}") for _ in range(rank)))
    tensors = [r.f64(int(np.prod(s, dtype=np.int64))).reshape(s) for s in shapes]
    if r.pos != len(r.buf):
        raise FormatError(f"{path}: {len(r.buf) - r.pos} trailing bytes after byte offset {r.pos}")
    return tensors, read_sidecar(path)
