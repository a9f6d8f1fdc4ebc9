"""FPT1 binary tensor files: named float32 arrays in one flat container.

Layout (all integers little-endian uint32):
    magic "FPT1"
    entry_count
    per entry:
        name_length, name (UTF-8)
        axis_count, axis_sizes...
        payload: float32 little-endian, row-major

Entries keep their written order. Payloads are stored as float32; arrays
of any float dtype are accepted on write and come back as float32, so a
float32 round-trip is bit-exact.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"FPT1"


class TensorFileError(ValueError):
    """Malformed or truncated tensor file; message carries the position."""


def write_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    """Write named arrays; the write is atomic (temp file + rename)."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", len(tensors))
    for name, arr in tensors.items():
        data = np.ascontiguousarray(arr, dtype="<f4")
        encoded = name.encode("utf-8")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<I", data.ndim)
        blob += struct.pack(f"<{data.ndim}I", *data.shape)
        blob += data.tobytes()
    tmp = f"{os.fspath(path)}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(blob)
    os.replace(tmp, path)


def read_tensors(path) -> dict[str, np.ndarray]:
    """Read all entries, preserving order. Raises TensorFileError on damage."""
    with open(path, "rb") as f:
        blob = f.read()

    pos = 0

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise TensorFileError(
                f"{path}: truncated while reading {what} at byte {pos} "
                f"(need {n}, have {len(blob) - pos})")
        chunk = blob[pos:pos + n]
        pos += n
        return chunk

    if take(4, "magic") != MAGIC:
        raise TensorFileError(f"{path}: bad magic at byte 0")
    (count,) = struct.unpack("<I", take(4, "entry count"))
    out: dict[str, np.ndarray] = {}
    for i in range(count):
        (name_len,) = struct.unpack("<I", take(4, f"entry {i} name length"))
        name = take(name_len, f"entry {i} name").decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4, f"entry {i} axis count"))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim, f"entry {i} axis sizes"))
        n_items = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        raw = take(4 * n_items, f"entry {i} ({name!r}) payload")
        out[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    if pos != len(blob):
        raise TensorFileError(f"{path}: {len(blob) - pos} trailing bytes at byte {pos}")
    return out
