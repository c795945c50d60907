"""SRDB: an append-only on-disk store of (inputs, outputs, elapsed) records.

Layout of a database directory:

    db/
      manifest.json           {"version": 1, "regions": [...]}
      .lock                   present while a writer holds the database
      regions/<name>/inputs.bin    raw little-endian f32/f64, row-major,
      regions/<name>/outputs.bin   one record after another
      regions/<name>/times.bin     little-endian u64 nanoseconds

Each manifest region entry carries name, dtype, per-record input/output
shapes, record_count, and created_utc. The first record appended to a
region fixes its shapes and dtype; payload bytes are flushed before the
manifest is atomically rewritten, so a crash leaves a readable prefix.

One writer at a time (lock file); any number of readers of a quiescent
database.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .bridge import Tensor, np_dtype
from .errors import (
    CorruptManifestError,
    IoError,
    RangeOutOfBoundsError,
    ShapeDriftError,
    UnknownRegionError,
    VersionMismatchError,
)

__all__ = ["SrdbManifest", "RegionInfo", "SrdbRecord", "SrdbDatabase", "open_db"]

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".lock"
REGIONS_DIR = "regions"
FORMAT_VERSION = 1

_PAYLOADS = ("inputs.bin", "outputs.bin", "times.bin")


@dataclass
class RegionInfo:
    name: str
    dtype: str
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]
    record_count: int
    created_utc: str

    def to_json(self) -> dict:
        d = asdict(self)
        d["input_shape"] = list(self.input_shape)
        d["output_shape"] = list(self.output_shape)
        return d


@dataclass
class SrdbManifest:
    version: int = FORMAT_VERSION
    regions: list[RegionInfo] = field(default_factory=list)

    def region(self, name: str) -> RegionInfo:
        for r in self.regions:
            if r.name == name:
                return r
        raise UnknownRegionError(f"no region {name!r} in database")

    def has_region(self, name: str) -> bool:
        return any(r.name == name for r in self.regions)


@dataclass
class SrdbRecord:
    index: int
    inputs: Tensor
    outputs: Tensor
    elapsed_ns: int


def _record_nbytes(shape: tuple[int, ...], dtype: str) -> int:
    n = 1
    for s in shape:
        n *= s
    return n * np_dtype(dtype).itemsize


class SrdbDatabase:
    """Handle over one database directory. Use open_db() to construct."""

    def __init__(self, root: Path, mode: str, manifest: SrdbManifest):
        self.root = root
        self.mode = mode
        self.manifest = manifest
        self._locked = False

    # -- lifecycle ----------------------------------------------------------

    @property
    def writable(self) -> bool:
        return self.mode in ("create", "append")

    def _lock_path(self) -> Path:
        return self.root / LOCK_NAME

    def _acquire_lock(self):
        try:
            fd = os.open(self._lock_path(), os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise IoError(
                f"database {self.root} is locked by another writer"
                f" (remove {LOCK_NAME} if that writer is gone)"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        self._locked = True

    def close(self):
        if self._locked:
            try:
                self._lock_path().unlink()
            except FileNotFoundError:
                pass
            self._locked = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- paths ---------------------------------------------------------------

    def _region_dir(self, name: str) -> Path:
        return self.root / REGIONS_DIR / name

    def _payload(self, name: str, which: str) -> Path:
        return self._region_dir(name) / which

    # -- manifest I/O ---------------------------------------------------------

    def _write_manifest(self):
        data = {
            "version": self.manifest.version,
            "regions": [r.to_json() for r in self.manifest.regions],
        }
        tmp = self.root / (MANIFEST_NAME + ".tmp")
        tmp.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self.root / MANIFEST_NAME)

    # -- operations -----------------------------------------------------------

    def append_record(self, region: str, inputs: Tensor, outputs: Tensor,
                      elapsed_ns: int) -> int:
        """Append one record; the first append to a region fixes its shapes."""
        if not self.writable:
            raise IoError("database opened read-only")
        if elapsed_ns <= 0:
            raise ValueError(f"elapsed_ns must be positive, got {elapsed_ns}")
        if inputs.dtype != outputs.dtype:
            raise ShapeDriftError(
                f"mixed dtypes in one region: inputs {inputs.dtype},"
                f" outputs {outputs.dtype}"
            )
        if self.manifest.has_region(region):
            info = self.manifest.region(region)
            if (inputs.shape != info.input_shape
                    or outputs.shape != info.output_shape
                    or inputs.dtype != info.dtype):
                raise ShapeDriftError(
                    f"record shape {inputs.shape}/{outputs.shape} ({inputs.dtype})"
                    f" drifts from first-seen {info.input_shape}/{info.output_shape}"
                    f" ({info.dtype})"
                )
        else:
            info = RegionInfo(
                name=region,
                dtype=inputs.dtype,
                input_shape=inputs.shape,
                output_shape=outputs.shape,
                record_count=0,
                created_utc=datetime.now(timezone.utc).isoformat(),
            )
            self.manifest.regions.append(info)
            self._region_dir(region).mkdir(parents=True, exist_ok=True)

        dt = np_dtype(info.dtype)
        with open(self._payload(region, "inputs.bin"), "ab") as fh:
            fh.write(np.ascontiguousarray(inputs.data, dtype=dt).tobytes())
        with open(self._payload(region, "outputs.bin"), "ab") as fh:
            fh.write(np.ascontiguousarray(outputs.data, dtype=dt).tobytes())
        with open(self._payload(region, "times.bin"), "ab") as fh:
            fh.write(struct.pack("<Q", elapsed_ns))

        index = info.record_count
        info.record_count += 1
        self._write_manifest()
        return index

    def read_records(self, region: str, start: int = 0,
                     stop: int | None = None) -> list[SrdbRecord]:
        info = self.manifest.region(region)
        if stop is None:
            stop = info.record_count
        if start < 0 or stop > info.record_count or start > stop:
            raise RangeOutOfBoundsError(
                f"range [{start}, {stop}) outside 0..{info.record_count}"
            )
        n = stop - start
        if n == 0:
            return []
        dt = np_dtype(info.dtype)
        in_rec = _record_nbytes(info.input_shape, info.dtype)
        out_rec = _record_nbytes(info.output_shape, info.dtype)

        def read_block(which, rec_bytes):
            with open(self._payload(region, which), "rb") as fh:
                fh.seek(start * rec_bytes)
                return fh.read(n * rec_bytes)

        ins = np.frombuffer(read_block("inputs.bin", in_rec), dtype=dt)
        outs = np.frombuffer(read_block("outputs.bin", out_rec), dtype=dt)
        times = struct.unpack(f"<{n}Q", read_block("times.bin", 8))
        ins = ins.reshape((n,) + info.input_shape)
        outs = outs.reshape((n,) + info.output_shape)
        return [
            SrdbRecord(
                index=start + k,
                inputs=Tensor(ins[k].copy()),
                outputs=Tensor(outs[k].copy()),
                elapsed_ns=times[k],
            )
            for k in range(n)
        ]

    def info(self) -> SrdbManifest:
        """Manifest snapshot; reading it has no side effects."""
        return SrdbManifest(
            version=self.manifest.version,
            regions=[RegionInfo(**asdict(r)) for r in self.manifest.regions],
        )


def _load_manifest(root: Path) -> SrdbManifest:
    path = root / MANIFEST_NAME
    if not path.exists():
        raise CorruptManifestError(f"no {MANIFEST_NAME} in {root}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptManifestError(f"unreadable manifest: {e}") from None
    version = raw.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"database version {version!r}, this reader supports {FORMAT_VERSION}"
        )
    regions = []
    for r in raw.get("regions", []):
        try:
            regions.append(
                RegionInfo(
                    name=r["name"],
                    dtype=r["dtype"],
                    input_shape=tuple(int(x) for x in r["input_shape"]),
                    output_shape=tuple(int(x) for x in r["output_shape"]),
                    record_count=int(r["record_count"]),
                    created_utc=r["created_utc"],
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptManifestError(f"bad region entry: {e}") from None
    return SrdbManifest(version=version, regions=regions)


def _check_integrity(root: Path, manifest: SrdbManifest):
    """Manifest length arithmetic: payload files must hold exactly
    record_count records each."""
    for info in manifest.regions:
        sizes = {
            "inputs.bin": info.record_count * _record_nbytes(info.input_shape, info.dtype),
            "outputs.bin": info.record_count * _record_nbytes(info.output_shape, info.dtype),
            "times.bin": info.record_count * 8,
        }
        for which, want in sizes.items():
            path = root / REGIONS_DIR / info.name / which
            have = path.stat().st_size if path.exists() else 0
            if have != want:
                raise CorruptManifestError(
                    f"{info.name}/{which} holds {have} bytes, manifest"
                    f" implies {want}"
                )


def open_db(path, mode: str) -> SrdbDatabase:
    """Open a database directory.

    mode "create": path must not exist (or be an empty directory);
    mode "append": existing database, acquires the writer lock;
    mode "read": existing database, validated, no lock.
    """
    if mode not in ("create", "append", "read"):
        raise ValueError(f"bad mode {mode!r}")
    root = Path(path)
    if mode == "create":
        if root.exists() and any(root.iterdir()):
            raise IoError(f"refusing to create database over non-empty {root}")
        try:
            (root / REGIONS_DIR).mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IoError(f"cannot create database at {root}: {e}") from None
        db = SrdbDatabase(root, mode, SrdbManifest())
        db._acquire_lock()
        db._write_manifest()
        return db
    manifest = _load_manifest(root)
    _check_integrity(root, manifest)
    db = SrdbDatabase(root, mode, manifest)
    if mode == "append":
        db._acquire_lock()
    return db
