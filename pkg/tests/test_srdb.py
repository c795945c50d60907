import json

import numpy as np
import pytest

from smlrt.bridge import Tensor
from smlrt.errors import (
    CorruptManifestError,
    IoError,
    RangeOutOfBoundsError,
    ShapeDriftError,
    UnknownRegionError,
    VersionMismatchError,
)
from smlrt.srdb import open_db


def tensor(shape, seed=0, dtype=np.float32):
    rng = np.random.default_rng(seed)
    return Tensor(rng.normal(size=shape).astype(dtype))


class TestOpen:
    def test_create_writes_empty_manifest(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            assert db.info().regions == []
        manifest = json.loads((tmp_path / "db" / "manifest.json").read_text())
        assert manifest == {"version": 1, "regions": []}

    def test_create_over_nonempty_refused(self, tmp_path):
        (tmp_path / "db").mkdir()
        (tmp_path / "db" / "junk").write_text("x")
        with pytest.raises(IoError):
            open_db(tmp_path / "db", "create")

    def test_read_missing_manifest(self, tmp_path):
        with pytest.raises(CorruptManifestError):
            open_db(tmp_path / "nope", "read")

    def test_version_mismatch(self, tmp_path):
        with open_db(tmp_path / "db", "create"):
            pass
        path = tmp_path / "db" / "manifest.json"
        raw = json.loads(path.read_text())
        raw["version"] = 2
        path.write_text(json.dumps(raw))
        with pytest.raises(VersionMismatchError):
            open_db(tmp_path / "db", "read")

    def test_truncated_payload_detected(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            db.append_record("r", tensor((2, 2, 5)), tensor((2, 2, 1)), 123)
        payload = tmp_path / "db" / "regions" / "r" / "inputs.bin"
        payload.write_bytes(payload.read_bytes()[:-4])
        with pytest.raises(CorruptManifestError):
            open_db(tmp_path / "db", "read")

    def test_writer_lock(self, tmp_path):
        db = open_db(tmp_path / "db", "create")
        with pytest.raises(IoError, match="locked"):
            open_db(tmp_path / "db", "append")
        open_db(tmp_path / "db", "read").close()  # readers unaffected
        db.close()
        open_db(tmp_path / "db", "append").close()


class TestAppendRead:
    def test_round_trip_bitwise(self, tmp_path):
        ins, outs = tensor((2, 2, 5), 1), tensor((2, 2, 1), 2)
        with open_db(tmp_path / "db", "create") as db:
            idx = db.append_record("stencil", ins, outs, 42)
            assert idx == 0
        with open_db(tmp_path / "db", "read") as db:
            rec = db.read_records("stencil", 0, 1)[0]
        assert rec.index == 0
        assert rec.elapsed_ns == 42
        assert rec.inputs.data.tobytes() == ins.data.tobytes()
        assert rec.outputs.data.tobytes() == outs.data.tobytes()

    def test_first_append_fixes_shape(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            db.append_record("r", tensor((2, 2, 5)), tensor((2, 2, 1)), 1)
            info = db.info().region("r")
            assert info.input_shape == (2, 2, 5)
            assert info.output_shape == (2, 2, 1)
            with pytest.raises(ShapeDriftError):
                db.append_record("r", tensor((2, 2, 4)), tensor((2, 2, 1)), 1)

    def test_dtype_drift(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            db.append_record("r", tensor((4,)), tensor((1,)), 1)
            with pytest.raises(ShapeDriftError):
                db.append_record("r", tensor((4,), dtype=np.float64),
                                 tensor((1,), dtype=np.float64), 1)

    def test_payload_length_arithmetic(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            for k in range(100):
                db.append_record("r", tensor((2, 2, 5), k), tensor((2, 2, 1), k), k + 1)
        size = (tmp_path / "db" / "regions" / "r" / "inputs.bin").stat().st_size
        assert size == 100 * 20 * 4
        assert (tmp_path / "db" / "regions" / "r" / "times.bin").stat().st_size == 800
        with open_db(tmp_path / "db", "read") as db:
            assert db.info().region("r").record_count == 100

    def test_elapsed_must_be_positive(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            with pytest.raises(ValueError):
                db.append_record("r", tensor((1,)), tensor((1,)), 0)

    def test_unknown_region(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            with pytest.raises(UnknownRegionError):
                db.read_records("ghost")

    def test_range_out_of_bounds(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            db.append_record("r", tensor((1,)), tensor((1,)), 1)
            with pytest.raises(RangeOutOfBoundsError):
                db.read_records("r", 0, 2)
            with pytest.raises(RangeOutOfBoundsError):
                db.read_records("r", -1, 1)

    def test_multiple_regions(self, tmp_path):
        with open_db(tmp_path / "db", "create") as db:
            db.append_record("a", tensor((3,)), tensor((1,)), 1)
            db.append_record("b", tensor((2, 2)), tensor((2, 1)), 2)
        with open_db(tmp_path / "db", "read") as db:
            assert {r.name for r in db.info().regions} == {"a", "b"}


def test_prefix_durability(tmp_path):
    """Simulate a crash mid-append: restore the previous manifest and drop
    the partial payload bytes; earlier records must read back intact."""
    with open_db(tmp_path / "db", "create") as db:
        for k in range(3):
            db.append_record("r", tensor((2, 3), k), tensor((2, 1), k), k + 1)
        manifest_before = (tmp_path / "db" / "manifest.json").read_bytes()
        db.append_record("r", tensor((2, 3), 99), tensor((2, 1), 99), 100)

    # crash: manifest never made it to disk for record 3; payloads did
    (tmp_path / "db" / "manifest.json").write_bytes(manifest_before)
    rdir = tmp_path / "db" / "regions" / "r"
    for name, rec_bytes in (("inputs.bin", 24), ("outputs.bin", 8), ("times.bin", 8)):
        p = rdir / name
        p.write_bytes(p.read_bytes()[: 3 * rec_bytes])

    with open_db(tmp_path / "db", "read") as db:
        records = db.read_records("r")
    assert len(records) == 3
    for k, rec in enumerate(records):
        assert rec.inputs.data.tobytes() == tensor((2, 3), k).data.tobytes()


def test_interleaved_ops_match_in_memory_reference(tmp_path):
    """Model-based check: 50 random append/read ops against a plain list."""
    rng = np.random.default_rng(77)
    reference = []
    with open_db(tmp_path / "db", "create") as db:
        for op in range(50):
            if not reference or rng.random() < 0.6:
                ins = Tensor(rng.normal(size=(3, 2)).astype(np.float32))
                outs = Tensor(rng.normal(size=(3, 1)).astype(np.float32))
                ns = int(rng.integers(1, 10_000))
                idx = db.append_record("r", ins, outs, ns)
                assert idx == len(reference)
                reference.append((ins, outs, ns))
            else:
                lo = int(rng.integers(0, len(reference)))
                hi = int(rng.integers(lo, len(reference))) + 1
                got = db.read_records("r", lo, hi)
                for rec, (ins, outs, ns) in zip(got, reference[lo:hi]):
                    assert rec.elapsed_ns == ns
                    assert np.array_equal(rec.inputs.data, ins.data)
                    assert np.array_equal(rec.outputs.data, outs.data)
