"""Shared test helpers: a naive gather oracle and random-case generators.

The oracle interprets a functor application with plain Python loops over
index tuples, touching none of the bridge's stride machinery, so it is an
independent check on concretize_to.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from smlrt.bridge import ArrayBuffer
from smlrt.directives import (
    ConcreteSlice,
    FunctorDecl,
    MapDirective,
    MapTarget,
    MlDirective,
    SliceDim,
    SymbolicSlice,
    SymExpr,
)


def _dim_indices(dim: SliceDim, sym_values: dict[str, int]) -> list[int]:
    base = sym_values[dim.symbol] if dim.symbol is not None else 0
    if dim.is_point:
        return [base + dim.start.offset]
    lo = base + dim.start.offset
    hi = base + dim.stop.offset
    return list(range(lo, hi, dim.step))


def gather_oracle(functor: FunctorDecl, target: MapTarget, array: ArrayBuffer) -> np.ndarray:
    """Element-by-element reference gather. Returns (sweep..., features...)."""
    symbols = functor.symbols
    sweep_ranges = [list(s.indices()) for s in target.slices]
    values = []
    for point in itertools.product(*sweep_ranges):
        sym_values = dict(zip(symbols, point))
        for s in functor.rhs:
            dim_lists = [_dim_indices(d, sym_values) for d in s.dims]
            for idx in itertools.product(*dim_lists):
                addr = sum(i * st for i, st in zip(idx, array.strides))
                values.append(array.data[addr])
    sweep_shape = tuple(len(r) for r in sweep_ranges)
    out = np.array(values, dtype=array.data.dtype)
    return out.reshape(sweep_shape + functor.feature_sizes)


def scatter_destinations(functor: FunctorDecl, target: MapTarget,
                         array: ArrayBuffer) -> set[int]:
    """Flat addresses a from-map writes, per the same naive interpretation."""
    symbols = functor.symbols
    addrs = set()
    for point in itertools.product(*[list(s.indices()) for s in target.slices]):
        sym_values = dict(zip(symbols, point))
        for s in functor.rhs:
            dim_lists = [_dim_indices(d, sym_values) for d in s.dims]
            for idx in itertools.product(*dim_lists):
                addrs.add(sum(i * st for i, st in zip(idx, array.strides)))
    return addrs


# ---------------------------------------------------------------------------
# Random bridge cases: affine functors with <=3 symbolic dims, offsets in
# [-2, 2], feature slices of at most 4 elements, on arrays of extent <= 16.
# ---------------------------------------------------------------------------

def random_bridge_case(rng: random.Random):
    n_sym = rng.randint(1, 3)
    syms = [f"s{k}" for k in range(n_sym)]

    rhs = []
    total_features = 0
    for _ in range(rng.randint(1, 4)):
        dims = []
        slice_features = 1
        for k in range(n_sym):
            budget = 4 // slice_features
            make_range = budget >= 2 and rng.random() < 0.35
            if make_range:
                step = rng.choice([1, 1, 2])
                lo = rng.randint(-2, 1)
                max_count = (2 - lo) // step + 1
                count = rng.randint(2, min(budget, max(2, max_count)))
                count = min(count, max_count)
                if count < 2:
                    dims.append(SliceDim(SymExpr.sym(syms[k], rng.randint(-2, 2))))
                    continue
                hi = lo + (count - 1) * step + 1
                dims.append(
                    SliceDim(SymExpr.sym(syms[k], lo), SymExpr.sym(syms[k], hi), step)
                )
                slice_features *= count
            else:
                dims.append(SliceDim(SymExpr.sym(syms[k], rng.randint(-2, 2))))
        rhs.append(SymbolicSlice(tuple(dims)))
        total_features += slice_features

    lhs_dims = [SliceDim(SymExpr.sym(s)) for s in syms]
    lhs_dims.append(SliceDim(SymExpr.const(0), SymExpr.const(total_features)))
    functor = FunctorDecl("rf", SymbolicSlice(tuple(lhs_dims)), tuple(rhs))

    shape = []
    slices = []
    for _ in range(n_sym):
        step = rng.choice([1, 1, 2])
        count = rng.randint(1, 4)
        span = (count - 1) * step
        extent = rng.randint(min(5 + span, 16), 16)
        start = rng.randint(2, extent - 3 - span)
        slices.append(ConcreteSlice(start, start + span + 1, step))
        shape.append(extent)
    target = MapTarget("a", tuple(slices))

    dtype = rng.choice(["f32", "f64"])
    data = np.arange(int(np.prod(shape)), dtype=np.float64)
    data = (data * 0.37 - data.mean()).astype("<f4" if dtype == "f32" else "<f8")
    array = ArrayBuffer.from_numpy(data.reshape(shape))
    return functor, target, array


# ---------------------------------------------------------------------------
# Random directive ASTs for parse/print round trips
# ---------------------------------------------------------------------------

_NAMES = ["fn", "stencil5", "gatherer", "ident", "probe", "f_2"]
_ARRAYS = ["t", "tnew", "grid", "recs", "pressure"]


def random_functor_ast(rng: random.Random) -> FunctorDecl:
    n_sym = rng.randint(1, 3)
    syms = [rng.choice("ijkpq") + (str(rng.randint(0, 9)) if rng.random() < 0.3 else "")
            for _ in range(n_sym)]
    syms = list(dict.fromkeys(syms)) or ["i"]
    n_feat = rng.randint(1, 2)
    feat_dims = []
    for _ in range(n_feat):
        lo = rng.randint(0, 3)
        hi = lo + rng.randint(1, 6)
        step = rng.choice([1, 1, 1, 2])
        feat_dims.append(SliceDim(SymExpr.const(lo), SymExpr.const(hi), step))
    lhs_dims = [SliceDim(SymExpr.sym(s)) for s in syms]
    for d in feat_dims:  # interleave one feature dim sometimes
        if rng.random() < 0.25 and len(lhs_dims) > 1:
            lhs_dims.insert(rng.randrange(len(lhs_dims)), d)
        else:
            lhs_dims.append(d)

    rhs = []
    for _ in range(rng.randint(1, 3)):
        dims = []
        for s in syms:
            if rng.random() < 0.3:
                lo = rng.randint(-2, 0)
                hi = lo + rng.randint(1, 3)
                step = rng.choice([1, 1, 2])
                dims.append(SliceDim(SymExpr.sym(s, lo), SymExpr.sym(s, hi), step))
            else:
                dims.append(SliceDim(SymExpr.sym(s, rng.randint(-3, 3))))
        if rng.random() < 0.2:
            lo = rng.randint(0, 4)
            dims.append(SliceDim(SymExpr.const(lo), SymExpr.const(lo + rng.randint(1, 4))))
        rhs.append(SymbolicSlice(tuple(dims)))
    return FunctorDecl(rng.choice(_NAMES), SymbolicSlice(tuple(lhs_dims)), tuple(rhs))


def random_map_ast(rng: random.Random) -> MapDirective:
    targets = []
    for _ in range(rng.randint(1, 2)):
        slices = []
        for _ in range(rng.randint(1, 3)):
            start = rng.randint(0, 8)
            stop = start + rng.randint(1, 12)
            step = rng.choice([1, 1, 1, 2, 3])
            slices.append(ConcreteSlice(start, stop, step))
        targets.append(MapTarget(rng.choice(_ARRAYS), tuple(slices)))
    return MapDirective(rng.choice(["to", "from"]), rng.choice(_NAMES), tuple(targets))


def random_ml_ast(rng: random.Random) -> MlDirective:
    mode = rng.choice(["infer", "collect", "predicated"])
    predicate = rng.choice([None, "true", "step % 2 == 0", "use_nn"]) \
        if mode == "predicated" else (None if rng.random() < 0.7 else "flag")
    refs = rng.sample(_ARRAYS, k=3)
    use_inout = rng.random() < 0.3
    kwargs = dict(
        mode=mode,
        predicate=predicate,
        in_refs=() if use_inout else (refs[0],),
        out_refs=() if use_inout else tuple(refs[1:2 + (rng.random() < 0.4)]),
        inout_refs=(refs[2],) if use_inout else (),
        model_path="models/m.bin" if mode in ("infer", "predicated") or rng.random() < 0.4 else None,
        db_path="out/run.srdb" if mode in ("collect", "predicated") or rng.random() < 0.4 else None,
        if_cond=rng.choice([None, None, "enabled", "step > 100"]),
    )
    return MlDirective(**kwargs)


def random_directive_ast(rng: random.Random):
    roll = rng.random()
    if roll < 0.4:
        return random_functor_ast(rng)
    if roll < 0.7:
        return random_map_ast(rng)
    return random_ml_ast(rng)
