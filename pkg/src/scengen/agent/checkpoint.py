"""Versioned binary checkpoints.

Layout: 4-byte magic ``GCKP``, little-endian uint32 format version,
little-endian uint64 manifest byte length, a UTF-8 JSON manifest, then
one contiguous little-endian float64 blob.  The manifest records the
configuration digest, the training step count, free-form metadata, and
for every tensor its name, shape, and element offset into the blob.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from ..errors import CheckpointError

MAGIC = b"GCKP"
FORMAT_VERSION = 1


def digest_config(mapping):
    """Stable hex digest of a flat configuration mapping."""
    canonical = "\n".join(f"{key}={mapping[key]!r}" for key in sorted(mapping))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_checkpoint(path, tensors, step, config_digest, meta=None):
    """Write named arrays plus bookkeeping into one file."""
    entries = []
    chunks = []
    offset = 0
    for name, array in tensors.items():
        # record the shape before flattening; ascontiguousarray would
        # silently promote rank-zero arrays to length-one vectors
        array = np.asarray(array, dtype="<f8")
        entries.append({"name": name, "shape": list(array.shape), "offset": offset})
        chunks.append(np.ascontiguousarray(array).reshape(-1))
        offset += array.size
    manifest = {
        "config_digest": config_digest,
        "step": int(step),
        "meta": dict(meta or {}),
        "tensors": entries,
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(manifest_bytes)))
        fh.write(manifest_bytes)
        for chunk in chunks:
            fh.write(chunk.tobytes())


def load_checkpoint(path):
    """Read a checkpoint back as (manifest, name -> float64 array)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version}")
    (manifest_len,) = struct.unpack_from("<Q", raw, 8)
    header_end = 16 + manifest_len
    if len(raw) < header_end:
        raise CheckpointError(f"{path} is truncated inside its manifest")
    try:
        manifest = json.loads(raw[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path} has an unreadable manifest: {exc}") from exc
    blob = np.frombuffer(raw[header_end:], dtype="<f8")
    tensors = {}
    for entry in manifest.get("tensors", []):
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        if start + size > blob.size:
            raise CheckpointError(
                f"{path}: tensor '{entry['name']}' runs past the end of the blob"
            )
        tensors[entry["name"]] = blob[start:start + size].reshape(shape).copy()
    return manifest, tensors
