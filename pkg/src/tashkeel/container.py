"""Versioned binary container used for models, lexicons and prior tables.

Layout (all integers little-endian)::

    magic      8 bytes  b"TASHKEEL"
    version    uint16
    header     uint32 length + UTF-8 JSON (sorted keys)
    payload    raw array bytes, in the order listed under header["arrays"]

The JSON header carries ``kind`` plus free-form metadata; every array is
stored little-endian with its dtype and shape recorded in the header.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ContainerError, ModelVersionMismatch

MAGIC = b"TASHKEEL"
FORMAT_VERSION = 1
_DTYPES = {"<f4", "<f8", "<i4", "<i8", "<u1"}


def atomic_write_bytes(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps(kind: str, meta: dict, arrays: dict[str, np.ndarray] | None = None) -> bytes:
    arrays = arrays or {}
    specs = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        dtype = arr.dtype.newbyteorder("<").str
        if dtype not in _DTYPES:
            raise ContainerError(f"unsupported dtype {arr.dtype} for array {name!r}")
        specs.append({"name": name, "dtype": dtype, "shape": list(arr.shape)})
        blobs.append(np.ascontiguousarray(arr, dtype=dtype).tobytes())
    header = {"kind": kind, "meta": meta, "arrays": specs}
    raw = json.dumps(header, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    return b"".join([MAGIC, struct.pack("<HI", FORMAT_VERSION, len(raw)), raw, *blobs])


def loads(data: bytes, kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    if data[: len(MAGIC)] != MAGIC:
        raise ContainerError("not a tashkeel container (bad magic)")
    off = len(MAGIC)
    version, hlen = struct.unpack_from("<HI", data, off)
    if version != FORMAT_VERSION:
        raise ModelVersionMismatch(f"container version {version}, this build reads {FORMAT_VERSION}")
    off += 6
    header = json.loads(data[off: off + hlen].decode("utf-8"))
    off += hlen
    if kind is not None and header["kind"] != kind:
        raise ContainerError(f"expected a {kind!r} container, found {header['kind']!r}")
    arrays = {}
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"], dtype=np.int64))
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=off).reshape(spec["shape"])
        arrays[spec["name"]] = arr.astype(dtype.newbyteorder("="), copy=True)
        off += count * dtype.itemsize
    if off != len(data):
        raise ContainerError("trailing bytes after payload")
    return header["meta"], arrays


def save(path, kind: str, meta: dict, arrays: dict[str, np.ndarray] | None = None):
    atomic_write_bytes(path, dumps(kind, meta, arrays))


def load(path, kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    return loads(Path(path).read_bytes(), kind)
