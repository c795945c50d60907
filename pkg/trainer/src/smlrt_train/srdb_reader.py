"""Standalone reader for SRDB record databases.

Implements the documented on-disk format directly (manifest.json plus raw
little-endian payload files per region) so the trainer stays decoupled
from the runtime that writes them. Kept deliberately small: this is the
"readable in any language in under 50 lines" property of the format.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError

_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}


def _prod(shape) -> int:
    n = 1
    for s in shape:
        n *= int(s)
    return n


def read_manifest(db_path) -> dict:
    path = Path(db_path) / "manifest.json"
    if not path.exists():
        raise FormatError(f"no manifest.json under {db_path}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"unreadable manifest: {e}") from None
    if manifest.get("version") != 1:
        raise FormatError(f"unsupported database version {manifest.get('version')!r}")
    if not isinstance(manifest.get("regions"), list):
        raise FormatError("manifest has no region list")
    return manifest


def region_info(db_path, region: str) -> dict:
    for entry in read_manifest(db_path)["regions"]:
        if entry.get("name") == region:
            return entry
    raise FormatError(f"no region {region!r} in {db_path}")


def read_region(db_path, region: str):
    """Return (inputs, outputs, elapsed_ns) arrays for one region.

    inputs has shape (records, *input_shape); outputs likewise; elapsed_ns
    is a (records,) uint64 vector. File lengths are validated against the
    manifest before anything is interpreted.
    """
    info = region_info(db_path, region)
    try:
        dtype = _DTYPES[info["dtype"]]
        in_shape = tuple(int(x) for x in info["input_shape"])
        out_shape = tuple(int(x) for x in info["output_shape"])
        count = int(info["record_count"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad region entry for {region!r}: {e}") from None

    rdir = Path(db_path) / "regions" / region
    arrays = []
    for name, shape, dt in (
        ("inputs.bin", in_shape, dtype),
        ("outputs.bin", out_shape, dtype),
        ("times.bin", (), np.dtype("<u8")),
    ):
        path = rdir / name
        want = count * _prod(shape) * dt.itemsize
        have = path.stat().st_size if path.exists() else 0
        if have != want:
            raise FormatError(
                f"{region}/{name} holds {have} bytes, manifest implies {want}"
            )
        data = np.fromfile(path, dtype=dt) if want else np.empty(0, dtype=dt)
        arrays.append(data.reshape((count,) + shape))
    return arrays[0], arrays[1], arrays[2]
