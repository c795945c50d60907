"""Execution control: per-region dispatch between the accurate path (with
data capture) and surrogate inference.

A region bundles an accurate callback with bound input/output maps and an
ml directive. Invoking it either

* gathers the inputs, runs the callback under a timer, gathers the outputs
  and appends (inputs, outputs, elapsed) to the region's database
  (collect mode, or predicated with a false predicate), or
* gathers the inputs, flattens them to a [batch, features] matrix, runs
  the cached model, and scatters the reshaped result into the output
  arrays without ever calling the callback (infer mode, or predicated
  with a true predicate).

Predicate and `if` booleans are supplied by the host on every call; there
is no compiler here to evaluate the directive's expressions. An `if` value
of False short-circuits to the plain accurate path with no collection.

Stored region times exclude mapping time; mapping and inference times are
accounted separately so overhead breakdowns stay honest.

A runtime instance belongs to one thread of control.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import srdb
from .bridge import (
    ArrayBuffer,
    Tensor,
    concretize_to,
    expected_tensor_shape,
    gather_batch,
    scatter_from,
)
from .directives import FunctorDecl, MapTarget, MlDirective
from .errors import (
    DuplicateRegionError,
    InvalidScheduleError,
    MissingClauseError,
    MissingPredicateError,
    ModelLoadError,
    ModelShapeMismatchError,
    ShapeMismatchError,
    UnknownRegionError,
)
from .models import Model, infer, load_model

__all__ = [
    "BoundMap",
    "RegionDescriptor",
    "RegionOutcome",
    "RegionStats",
    "Runtime",
    "interleave_predicate",
]

ACCURATE = "accurate"
SURROGATE = "surrogate"


@dataclass
class BoundMap:
    """A functor applied to a concrete target range of one array."""

    functor: FunctorDecl
    target: MapTarget
    array: ArrayBuffer


@dataclass
class RegionDescriptor:
    name: str
    accurate_fn: Callable[[], None]
    ml: MlDirective
    in_maps: list[BoundMap] = field(default_factory=list)
    out_maps: list[BoundMap] = field(default_factory=list)
    inout_maps: list[BoundMap] = field(default_factory=list)
    env: dict[str, int] = field(default_factory=dict)


@dataclass
class RegionOutcome:
    """What one invocation did and where the time went (nanoseconds).

    elapsed_region_ns times the executed body only: the accurate callback
    on the accurate path, model inference on the surrogate path. Mapping
    times are reported separately and are 0 on paths that skip mapping.
    """

    path_taken: str
    elapsed_region_ns: int
    elapsed_map_to_ns: int = 0
    elapsed_map_from_ns: int = 0
    elapsed_infer_ns: int = 0
    record_index: Optional[int] = None


@dataclass
class RegionStats:
    invocations: int = 0
    accurate_calls: int = 0
    surrogate_calls: int = 0
    records: int = 0
    model_loads: int = 0
    map_to_ns: int = 0
    map_from_ns: int = 0
    infer_ns: int = 0
    accurate_ns: int = 0


def interleave_predicate(step: int, n_accurate: int, n_surrogate: int) -> bool:
    """True (take the surrogate) on the surrogate part of a repeating
    n_accurate:n_surrogate schedule. Pure function of the step index."""
    if n_accurate < 0 or n_surrogate < 0:
        raise InvalidScheduleError("interleave counts must be non-negative")
    period = n_accurate + n_surrogate
    if period == 0:
        raise InvalidScheduleError("interleave schedule needs a non-zero period")
    return (step % period) >= n_accurate


def _resolve_refs(refs: Sequence[str], maps: Sequence[BoundMap], clause: str):
    by_name: dict[str, BoundMap] = {}
    for m in maps:
        if m.target.array in by_name:
            raise MissingClauseError(
                f"array {m.target.array!r} bound twice in {clause} maps"
            )
        by_name[m.target.array] = m
    for ref in refs:
        if ref not in by_name:
            raise MissingClauseError(
                f"ml {clause}({ref}) has no matching bound map"
            )


class Runtime:
    """Registry of annotated regions plus the model and database caches."""

    def __init__(self):
        self._regions: dict[str, RegionDescriptor] = {}
        self._stats: dict[str, RegionStats] = {}
        self._models: dict[str, Model] = {}
        self._dbs: dict[str, srdb.SrdbDatabase] = {}

    # -- registration ---------------------------------------------------------

    def register_region(self, desc: RegionDescriptor) -> str:
        ml = desc.ml
        if ml.mode in ("infer", "predicated") and not ml.model_path:
            raise MissingClauseError(f"ml({ml.mode}) region without a model path")
        if ml.mode in ("collect", "predicated") and not ml.db_path:
            raise MissingClauseError(f"ml({ml.mode}) region without a db path")
        _resolve_refs(ml.in_refs, desc.in_maps, "in")
        _resolve_refs(ml.out_refs, desc.out_maps, "out")
        _resolve_refs(ml.inout_refs, desc.inout_maps, "inout")
        existing = self._regions.get(desc.name)
        if existing is not None:
            if existing != desc:
                raise DuplicateRegionError(
                    f"region {desc.name!r} already registered with a"
                    " different descriptor"
                )
            return desc.name
        self._regions[desc.name] = desc
        self._stats[desc.name] = RegionStats()
        return desc.name

    def _region(self, handle: str) -> RegionDescriptor:
        try:
            return self._regions[handle]
        except KeyError:
            raise UnknownRegionError(f"no region registered as {handle!r}") from None

    # -- caches ---------------------------------------------------------------

    def _model_for(self, desc: RegionDescriptor) -> Model:
        key = os.path.realpath(desc.ml.model_path)
        model = self._models.get(key)
        if model is None:
            try:
                model = load_model(desc.ml.model_path)
            except Exception as e:
                raise ModelLoadError(
                    f"cannot load model {desc.ml.model_path!r}: {e}"
                ) from e
            self._models[key] = model
            self._stats[desc.name].model_loads += 1
        return model

    def _db_for(self, desc: RegionDescriptor) -> srdb.SrdbDatabase:
        path = desc.ml.db_path
        db = self._dbs.get(path)
        if db is None:
            if os.path.exists(os.path.join(path, srdb.MANIFEST_NAME)):
                db = srdb.open_db(path, "append")
            else:
                db = srdb.open_db(path, "create")
            self._dbs[path] = db
        return db

    def unload_models(self):
        """Drop cached models; the next inference reloads from disk."""
        self._models.clear()

    def close(self):
        for db in self._dbs.values():
            db.close()
        self._dbs.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- invocation -----------------------------------------------------------

    def invoke_region(
        self,
        handle: str,
        predicate_value: Optional[bool] = None,
        if_value: Optional[bool] = None,
    ) -> RegionOutcome:
        desc = self._region(handle)
        st = self._stats[handle]
        st.invocations += 1
        ml = desc.ml

        if ml.if_cond is not None:
            if if_value is None:
                raise MissingPredicateError(
                    f"region {handle!r} has an if({ml.if_cond}) clause;"
                    " pass if_value on every invocation"
                )
            if not if_value:
                return self._run_plain_accurate(desc, st)

        if ml.mode == "collect":
            surrogate = False
        elif ml.mode == "infer":
            surrogate = True
        else:  # predicated
            if predicate_value is None:
                raise MissingPredicateError(
                    f"region {handle!r} is predicated ({ml.predicate});"
                    " pass predicate_value on every invocation"
                )
            surrogate = bool(predicate_value)

        if surrogate:
            return self._run_surrogate(desc, st)
        return self._run_collect(desc, st)

    # -- paths ----------------------------------------------------------------

    def _run_plain_accurate(self, desc, st) -> RegionOutcome:
        t0 = time.perf_counter_ns()
        desc.accurate_fn()
        dt = max(time.perf_counter_ns() - t0, 1)
        st.accurate_calls += 1
        st.accurate_ns += dt
        return RegionOutcome(path_taken=ACCURATE, elapsed_region_ns=dt)

    def _gather_inputs(self, desc) -> Tensor:
        return _combined_tensor(desc.in_maps + desc.inout_maps)

    def _gather_outputs(self, desc) -> Tensor:
        return _combined_tensor(desc.out_maps + desc.inout_maps)

    def _run_collect(self, desc, st) -> RegionOutcome:
        t0 = time.perf_counter_ns()
        inputs = self._gather_inputs(desc)
        map_to = max(time.perf_counter_ns() - t0, 1)

        t0 = time.perf_counter_ns()
        desc.accurate_fn()
        region_ns = max(time.perf_counter_ns() - t0, 1)

        t0 = time.perf_counter_ns()
        outputs = self._gather_outputs(desc)
        map_from = max(time.perf_counter_ns() - t0, 1)

        db = self._db_for(desc)
        index = db.append_record(desc.name, inputs, outputs, region_ns)

        st.accurate_calls += 1
        st.accurate_ns += region_ns
        st.map_to_ns += map_to
        st.map_from_ns += map_from
        st.records += 1
        return RegionOutcome(
            path_taken=ACCURATE,
            elapsed_region_ns=region_ns,
            elapsed_map_to_ns=map_to,
            elapsed_map_from_ns=map_from,
            record_index=index,
        )

    def _run_surrogate(self, desc, st) -> RegionOutcome:
        model = self._model_for(desc)

        t0 = time.perf_counter_ns()
        in_maps = desc.in_maps + desc.inout_maps
        batches = []
        batch_rows = None
        for m in in_maps:
            _, flat = gather_batch(m.functor, m.target, m.array)
            if batch_rows is None:
                batch_rows = flat.shape[0]
            elif flat.shape[0] != batch_rows:
                raise ShapeMismatchError(
                    "input maps disagree on the sweep/batch size"
                )
            batches.append(flat)
        x = batches[0] if len(batches) == 1 else np.concatenate(batches, axis=1)
        map_to = max(time.perf_counter_ns() - t0, 1)

        if x.shape[1] != model.input_features:
            raise ModelShapeMismatchError(
                f"region {desc.name!r} gathers {x.shape[1]} features,"
                f" model expects {model.input_features}"
            )
        out_maps = desc.out_maps + desc.inout_maps
        out_counts = [m.functor.feature_count for m in out_maps]
        if sum(out_counts) != model.output_features:
            raise ModelShapeMismatchError(
                f"region {desc.name!r} scatters {sum(out_counts)} features,"
                f" model emits {model.output_features}"
            )

        t0 = time.perf_counter_ns()
        y = infer(model, x)
        infer_ns = max(time.perf_counter_ns() - t0, 1)

        t0 = time.perf_counter_ns()
        col = 0
        for m, g in zip(out_maps, out_counts):
            shape = expected_tensor_shape(m.functor, m.target)
            rows = int(np.prod(shape[: len(m.target.slices)], dtype=np.int64))
            if rows != batch_rows:
                raise ModelShapeMismatchError(
                    f"output map over {m.target.array!r} sweeps {rows} entries,"
                    f" batch holds {batch_rows}"
                )
            chunk = y[:, col : col + g].reshape(shape)
            dt = m.array.data.dtype
            scatter_from(m.functor, m.target, Tensor(chunk.astype(dt, copy=False)), m.array)
            col += g
        map_from = max(time.perf_counter_ns() - t0, 1)

        st.surrogate_calls += 1
        st.map_to_ns += map_to
        st.map_from_ns += map_from
        st.infer_ns += infer_ns
        return RegionOutcome(
            path_taken=SURROGATE,
            elapsed_region_ns=infer_ns,
            elapsed_map_to_ns=map_to,
            elapsed_map_from_ns=map_from,
            elapsed_infer_ns=infer_ns,
        )

    # -- introspection ----------------------------------------------------------

    def stats(self, handle: str) -> RegionStats:
        self._region(handle)
        return replace(self._stats[handle])


def _combined_tensor(maps: Sequence[BoundMap]) -> Tensor:
    """Gather each map and concatenate along the feature axis. All maps of
    one role must share the sweep shape so records stay rectangular."""
    if not maps:
        raise MissingClauseError("region has no maps for this direction")
    tensors = []
    sweep = None
    for m in maps:
        t = concretize_to(m.functor, m.target, m.array)
        s = t.shape[: len(m.target.slices)]
        if sweep is None:
            sweep = s
        elif s != sweep:
            raise ShapeMismatchError(
                f"map over {m.target.array!r} sweeps {s}, expected {sweep}"
            )
        tensors.append(t.data.reshape(sweep + (-1,)))
    if len(tensors) == 1:
        return Tensor(tensors[0])
    return Tensor(np.concatenate(tensors, axis=-1))
