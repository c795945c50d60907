"""Data bridge between application memory and dense tensors.

The forward direction runs a four-step pipeline per functor application:

1. symbolic shape extraction -- per RHS slice, one offset/count/step entry
   per array dimension, relative to the first mapped element;
2. symbolic shape resolution -- concrete start/end/stride over the mapped
   ranges plus the implied feature axes (size 1 for single-element slices);
3. tensor wrapping -- zero-copy strided views over the source buffer, with
   eager bounds checking;
4. tensor composition -- the only copying step: views are materialized and
   concatenated along the trailing feature axis.

The reverse direction (`scatter_from`) reuses steps 1-3 to build write
views and requires every destination element to be written exactly once.

Sweep axes follow the LHS symbol declaration order; the k-th symbolic dim
binds to the k-th concrete slice of the map target. RHS slice dims address
the array dims positionally and may be symbolic (point or range around one
symbol) or concrete (fixed points/ranges, e.g. an identity feature map over
a record array).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .directives import ConcreteSlice, FunctorDecl, MapTarget, SliceDim
from .errors import (
    ArityMismatchError,
    FeatureMismatchError,
    NonInjectiveScatterError,
    OutOfBoundsError,
    SemanticError,
    ShapeMismatchError,
)

__all__ = [
    "ArrayBuffer",
    "Tensor",
    "MemoryView",
    "SliceDescriptor",
    "ResolvedSlice",
    "extract_symbolic_shape",
    "resolve_symbolic_shape",
    "wrap_tensors",
    "compose_tensor",
    "concretize_to",
    "scatter_from",
]

_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}


def np_dtype(name: str) -> np.dtype:
    try:
        return _DTYPES[name]
    except KeyError:
        raise ValueError(f"unsupported dtype {name!r} (expected f32 or f64)") from None


def dtype_name(dt: np.dtype) -> str:
    for name, d in _DTYPES.items():
        if d == dt:
            return name
    raise ValueError(f"unsupported numpy dtype {dt}")


# ---------------------------------------------------------------------------
# Memory spaces
# ---------------------------------------------------------------------------

@dataclass
class ArrayBuffer:
    """Host-side strided array: flat element storage plus shape/strides.

    Strides are in element units and must be positive; the default layout
    is row-major but column-major (or padded) sources can be wrapped by
    passing explicit strides.
    """

    data: np.ndarray
    shape: tuple[int, ...]
    strides: tuple[int, ...]

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        self.strides = tuple(int(s) for s in self.strides)
        if self.data.ndim != 1:
            raise ValueError("ArrayBuffer storage must be flat")
        dtype_name(self.data.dtype)  # validates
        if len(self.shape) != len(self.strides):
            raise ValueError("shape and strides must have equal rank")
        if any(s < 1 for s in self.shape):
            raise ValueError(f"non-positive extent in shape {self.shape}")
        if any(s < 1 for s in self.strides):
            raise ValueError(f"non-positive stride in {self.strides}")
        span = 1 + sum((n - 1) * s for n, s in zip(self.shape, self.strides))
        if span > self.data.size:
            raise ValueError(
                f"shape {self.shape} with strides {self.strides} needs {span}"
                f" elements, storage has {self.data.size}"
            )

    @classmethod
    def from_numpy(cls, arr: np.ndarray) -> "ArrayBuffer":
        """Wrap a C-contiguous array without copying."""
        arr = np.ascontiguousarray(arr)
        strides = tuple(s // arr.itemsize for s in arr.strides)
        return cls(arr.reshape(-1), tuple(arr.shape), strides)

    @classmethod
    def zeros(cls, shape: Sequence[int], dtype: str = "f64") -> "ArrayBuffer":
        return cls.from_numpy(np.zeros(tuple(shape), dtype=np_dtype(dtype)))

    @property
    def dtype(self) -> str:
        return dtype_name(self.data.dtype)

    def to_numpy(self) -> np.ndarray:
        """Strided view (not a copy) shaped like the logical array."""
        byte_strides = tuple(s * self.data.itemsize for s in self.strides)
        return np.lib.stride_tricks.as_strided(self.data, self.shape, byte_strides)


@dataclass
class Tensor:
    """Dense row-major tensor."""

    data: np.ndarray

    def __post_init__(self):
        dtype_name(self.data.dtype)
        self.data = np.ascontiguousarray(self.data)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> str:
        return dtype_name(self.data.dtype)


@dataclass(frozen=True)
class MemoryView:
    """Zero-copy strided window into an ArrayBuffer.

    Shape is (sweep axes..., feature axes...); strides are element units.
    A stride may be 0 when an RHS slice ignores one sweep symbol.
    """

    source: ArrayBuffer
    base_offset: int
    shape: tuple[int, ...]
    strides: tuple[int, ...]
    n_sweep: int

    def as_numpy(self) -> np.ndarray:
        itemsize = self.source.data.itemsize
        byte_strides = tuple(s * itemsize for s in self.strides)
        return np.lib.stride_tricks.as_strided(
            self.source.data[self.base_offset :], self.shape, byte_strides
        )


# ---------------------------------------------------------------------------
# Step 1: symbolic shape extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceDescriptor:
    """Per-dimension access pattern of one RHS slice.

    offset_per_dim is relative to the first mapped element for symbolic
    dims and absolute for concrete dims (which have no mapped range).
    symbol_per_dim holds the sweep-axis index driving each dim, or None
    for concrete dims.
    """

    offset_per_dim: tuple[int, ...]
    elem_count_per_dim: tuple[int, ...]
    step_per_dim: tuple[int, ...]
    symbol_per_dim: tuple[Optional[int], ...]


def _dim_descriptor(dim: SliceDim, symbols: dict[str, int]):
    if dim.symbol is not None:
        sym = symbols[dim.symbol]
        if dim.is_point:
            return dim.start.offset, 1, 1, sym
        count = (dim.stop.offset - dim.start.offset + dim.step - 1) // dim.step
        return dim.start.offset, count, dim.step, sym
    if dim.is_point:
        return dim.start.offset, 1, 1, None
    return dim.start.offset, dim.const_count(), dim.step, None


def extract_symbolic_shape(
    functor: FunctorDecl, target: MapTarget
) -> list[SliceDescriptor]:
    """Compute per-slice offsets/counts/steps relative to the first mapped
    element (the element addressed with every symbol at its range start)."""
    symbols = {name: k for k, name in enumerate(functor.symbols)}
    if len(target.slices) != len(symbols):
        raise ArityMismatchError(
            f"functor {functor.name!r} sweeps {len(symbols)} symbol(s) but the"
            f" target {target.array!r} supplies {len(target.slices)} slice(s)"
        )
    descriptors = []
    for s in functor.rhs:
        entries = [_dim_descriptor(d, symbols) for d in s.dims]
        descriptors.append(
            SliceDescriptor(
                tuple(e[0] for e in entries),
                tuple(e[1] for e in entries),
                tuple(e[2] for e in entries),
                tuple(e[3] for e in entries),
            )
        )
    return descriptors


# ---------------------------------------------------------------------------
# Step 2: symbolic shape resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolvedSlice:
    """Descriptor augmented with concrete ranges over the mapped target.

    start/stop/step describe, per array dim, the range the dim's first
    element sweeps (a degenerate 1-element range for concrete dims); the
    feature axes collect per-dim element counts, padded to (1,) so every
    slice contributes at least one feature.
    """

    descriptor: SliceDescriptor
    start_per_dim: tuple[int, ...]
    stop_per_dim: tuple[int, ...]
    step_per_dim: tuple[int, ...]
    sweep_shape: tuple[int, ...]
    feature_shape: tuple[int, ...]

    @property
    def feature_count(self) -> int:
        n = 1
        for f in self.feature_shape:
            n *= f
        return n


def resolve_symbolic_shape(
    descriptors: Sequence[SliceDescriptor], target: MapTarget
) -> list[ResolvedSlice]:
    sweep_shape = tuple(s.count for s in target.slices)
    resolved = []
    for d in descriptors:
        starts, stops, steps = [], [], []
        for off, sym, step, count in zip(
            d.offset_per_dim, d.symbol_per_dim, d.step_per_dim, d.elem_count_per_dim
        ):
            if sym is not None:
                t = target.slices[sym]
                starts.append(t.start)
                stops.append(t.stop)
                steps.append(t.step)
            else:
                starts.append(off)
                stops.append(off + (count - 1) * step + 1)
                steps.append(step)
        features = tuple(c for c in d.elem_count_per_dim if c > 1) or (1,)
        resolved.append(
            ResolvedSlice(
                d, tuple(starts), tuple(stops), tuple(steps), sweep_shape, features
            )
        )
    return resolved


# ---------------------------------------------------------------------------
# Step 3: tensor wrapping
# ---------------------------------------------------------------------------

def wrap_tensors(
    resolved: Sequence[ResolvedSlice], array: ArrayBuffer
) -> list[MemoryView]:
    """Build one zero-copy view per RHS slice; no element is touched.

    Bounds are checked eagerly here: a functor offset that pushes any swept
    index outside the array raises OutOfBoundsError.
    """
    views = []
    for r in resolved:
        d = r.descriptor
        if len(d.offset_per_dim) != len(array.shape):
            raise ArityMismatchError(
                f"RHS slice addresses {len(d.offset_per_dim)} dim(s), array"
                f" has {len(array.shape)}"
            )
        n_sweep = len(r.sweep_shape)
        base = 0
        sweep_strides = [0] * n_sweep
        feat_axes = []
        for dim in range(len(array.shape)):
            astride = array.strides[dim]
            off = d.offset_per_dim[dim]
            count = d.elem_count_per_dim[dim]
            step = d.step_per_dim[dim]
            sym = d.symbol_per_dim[dim]
            if sym is not None:
                first = r.start_per_dim[dim] + off
                sweep_span = (r.sweep_shape[sym] - 1) * r.step_per_dim[dim]
                sweep_strides[sym] += astride * r.step_per_dim[dim]
            else:
                first = off
                sweep_span = 0
            last = first + sweep_span + (count - 1) * step
            if first < 0 or last >= array.shape[dim]:
                raise OutOfBoundsError(
                    f"slice sweeps indices {first}..{last} on array dim {dim}"
                    f" of extent {array.shape[dim]}"
                )
            base += first * astride
            if count > 1:
                feat_axes.append((count, astride * step))
        if feat_axes:
            feat_shape = tuple(n for n, _ in feat_axes)
            feat_strides = tuple(s for _, s in feat_axes)
        else:
            feat_shape, feat_strides = (1,), (1,)
        views.append(
            MemoryView(
                source=array,
                base_offset=base,
                shape=r.sweep_shape + feat_shape,
                strides=tuple(sweep_strides) + feat_strides,
                n_sweep=n_sweep,
            )
        )
    return views


# ---------------------------------------------------------------------------
# Step 4: tensor composition
# ---------------------------------------------------------------------------

def compose_tensor(views: Sequence[MemoryView], functor: FunctorDecl) -> Tensor:
    """Concatenate the RHS views into one dense tensor.

    Result shape is (sweep..., LHS feature sizes...); per-view feature axes
    flatten row-major, views ordered by RHS declaration. This is the only
    step that copies memory.
    """
    if not views:
        raise ValueError("nothing to compose")
    sweep = views[0].shape[: views[0].n_sweep]
    dt = views[0].source.data.dtype
    for v in views:
        if v.shape[: v.n_sweep] != sweep:
            raise ShapeMismatchError("RHS views disagree on the sweep shape")
        if v.source.data.dtype != dt:
            raise ShapeMismatchError("RHS views disagree on dtype")
    total = sum(int(np.prod(v.shape[v.n_sweep :])) for v in views)
    if total != functor.feature_count:
        raise FeatureMismatchError(
            f"RHS slices supply {total} feature element(s), LHS of"
            f" {functor.name!r} declares {functor.feature_count}"
        )
    # always copy into fresh storage: the composed tensor must be a snapshot,
    # never an alias of application memory
    out = np.empty(sweep + (total,), dtype=dt)
    col = 0
    for v in views:
        n = int(np.prod(v.shape[v.n_sweep :]))
        out[..., col : col + n] = v.as_numpy().reshape(sweep + (n,))
        col += n
    return Tensor(out.reshape(sweep + functor.feature_sizes))


# ---------------------------------------------------------------------------
# End-to-end directions
# ---------------------------------------------------------------------------

def concretize_to(
    functor: FunctorDecl, target: MapTarget, array: ArrayBuffer
) -> Tensor:
    """Application memory -> tensor (pure read; the array is not touched)."""
    descriptors = extract_symbolic_shape(functor, target)
    resolved = resolve_symbolic_shape(descriptors, target)
    views = wrap_tensors(resolved, array)
    return compose_tensor(views, functor)


def _expected_shape(functor: FunctorDecl, target: MapTarget) -> tuple[int, ...]:
    return tuple(s.count for s in target.slices) + functor.feature_sizes


def expected_tensor_shape(functor: FunctorDecl, target: MapTarget) -> tuple[int, ...]:
    """Shape concretize_to produces for this (functor, target) pair."""
    return _expected_shape(functor, target)


def scatter_from(
    functor: FunctorDecl, target: MapTarget, tensor: Tensor, array: ArrayBuffer
) -> None:
    """Tensor -> application memory, writing exactly the mapped elements.

    The functor's RHS must consist of point slices so every tensor element
    has a single destination; overlapping destinations raise
    NonInjectiveScatterError before anything is written.
    """
    for s in functor.rhs:
        for d in s.dims:
            if not d.is_point:
                raise NonInjectiveScatterError(
                    f"RHS range slice {d} in functor {functor.name!r} gives"
                    " tensor elements more than one destination"
                )
    if len(functor.rhs) != functor.feature_count:
        raise FeatureMismatchError(
            f"scatter functor {functor.name!r} has {len(functor.rhs)} point"
            f" slice(s) but declares {functor.feature_count} feature(s)"
        )
    want = _expected_shape(functor, target)
    if tensor.shape != want:
        raise ShapeMismatchError(
            f"tensor shape {tensor.shape} does not match mapping shape {want}"
        )
    descriptors = extract_symbolic_shape(functor, target)
    resolved = resolve_symbolic_shape(descriptors, target)
    views = wrap_tensors(resolved, array)

    addresses = []
    for v in views:
        grid = np.full((), v.base_offset, dtype=np.int64)
        for extent, stride in zip(v.shape, v.strides):
            grid = grid[..., None] + np.arange(extent, dtype=np.int64) * stride
        addresses.append(grid.reshape(-1))
    all_addrs = np.concatenate(addresses)
    if np.unique(all_addrs).size != all_addrs.size:
        raise NonInjectiveScatterError(
            f"functor {functor.name!r} maps {all_addrs.size} tensor elements"
            f" onto {np.unique(all_addrs).size} distinct array elements"
        )

    n_sweep = len(target.slices)
    values = tensor.data.reshape(tensor.shape[:n_sweep] + (-1,))
    for f, v in enumerate(views):
        dest = v.as_numpy()  # (sweep..., 1) for point slices
        dest[..., 0] = values[..., f].astype(array.data.dtype, copy=False)


def gather_batch(functor: FunctorDecl, target: MapTarget, array: ArrayBuffer):
    """Concretize and flatten to (batch, features) for model inference."""
    t = concretize_to(functor, target, array)
    n_sweep = len(target.slices)
    batch = int(np.prod(t.shape[:n_sweep], dtype=np.int64)) if n_sweep else 1
    return t, t.data.reshape(batch, -1)
