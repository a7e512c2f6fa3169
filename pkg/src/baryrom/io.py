"""Binary persistence: matrix files, tensor archives, manifests.

Matrix file layout: 8-byte magic ``ROMBMAT1``, then little-endian u64
row and column counts, then rows*cols float64 values, row-major,
little-endian.  The declared sizes must match the payload exactly.

Archive layout: 8-byte magic ``ROMBARC1``, little-endian u64 header
length, a UTF-8 JSON header mapping array names to shapes/offsets plus
free-form metadata, then the concatenated raw float64 payloads.  Both
writers are byte-deterministic for equal inputs.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataIntegrityError

MATRIX_MAGIC = b"ROMBMAT1"
ARCHIVE_MAGIC = b"ROMBARC1"


def write_matrix(path, arr):
    arr = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"matrix files hold 2-D data, got ndim={arr.ndim}")
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(arr.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 24 or raw[:8] != MATRIX_MAGIC:
        raise DataIntegrityError(f"{path}: not a matrix file")
    rows, cols = struct.unpack("<QQ", raw[8:24])
    expected = 24 + rows * cols * 8
    if len(raw) != expected:
        raise DataIntegrityError(
            f"{path}: payload length {len(raw)} does not match declared "
            f"{rows}x{cols} float64"
        )
    return np.frombuffer(raw[24:], dtype="<f8").reshape(rows, cols).copy()


def write_archive(path, arrays: dict, meta: dict):
    names = sorted(arrays)
    entries = {}
    offset = 0
    payloads = []
    for name in names:
        arr = np.ascontiguousarray(np.asarray(arrays[name], dtype="<f8"))
        entries[name] = {"shape": list(arr.shape), "offset": offset}
        buf = arr.tobytes(order="C")
        payloads.append(buf)
        offset += len(buf)
    header = json.dumps(
        {"arrays": entries, "meta": meta}, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(ARCHIVE_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for buf in payloads:
            fh.write(buf)


def read_archive(path):
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:8] != ARCHIVE_MAGIC:
        raise DataIntegrityError(f"{path}: not an archive file")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    payload = raw[16 + hlen:]
    arrays = {}
    for name, entry in header["arrays"].items():
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * 8
        if end > len(payload):
            raise DataIntegrityError(f"{path}: array {name!r} overruns the payload")
        arrays[name] = np.frombuffer(payload[start:end], dtype="<f8").reshape(shape).copy()
    return arrays, header["meta"]


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, manifest: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataIntegrityError(f"manifest not found: {path}")
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


def check_file(outdir, entry: dict) -> Path:
    """Resolve a manifest file entry and verify its recorded hash."""
    p = Path(outdir) / entry["path"]
    if not p.exists():
        raise DataIntegrityError(f"missing data file: {p}")
    digest = sha256_file(p)
    if digest != entry["sha256"]:
        raise DataIntegrityError(
            f"hash mismatch for {p}: expected {entry['sha256'][:12]}..., "
            f"got {digest[:12]}..."
        )
    return p
