"""2-D Jacobi stencil mini-app driven through the directive runtime.

The accurate kernel averages the four neighbors of every interior point;
boundary values are frozen from the initial field (Dirichlet). The initial
field is a sum of two seeded Gaussian bumps, which gives smooth dynamics a
small model can learn.

The kernel scales each neighbor before summing, in the same order the
5-point surrogate model accumulates its features, so an exact linear model
reproduces the f32 trajectory bit for bit.
"""

from __future__ import annotations

import time

import numpy as np

from ..bridge import ArrayBuffer, np_dtype
from ..directives import parse_directive, parse_ml_clause
from ..runtime import BoundMap, RegionDescriptor, Runtime, interleave_predicate
from .config import BenchConfig
from .metrics import compute_rmse
from .report import BenchReport

__all__ = [
    "REGION_NAME",
    "IN_FUNCTOR",
    "OUT_FUNCTOR",
    "MAP_TO",
    "MAP_FROM",
    "initial_field",
    "jacobi_step",
    "run_stencil",
]

REGION_NAME = "stencil"

# The stencil's directive set: a 5-point input functor, an identity output
# functor, and the interior maps, with grid extents supplied via N/M.
IN_FUNCTOR = "functor(ifnctr: [i, j, 0:5] = (([i-1, j], [i+1, j], [i, j-1:j+2])))"
OUT_FUNCTOR = "functor(ofnctr: [i, j, 0:1] = ([i, j]))"
MAP_TO = "map(to: ifnctr(t[1:N-1, 1:M-1]))"
MAP_FROM = "map(from: ofnctr(tnew[1:N-1, 1:M-1]))"


def initial_field(n: int, m: int, seed: int, dtype: str = "f32") -> np.ndarray:
    """Sum of two seeded Gaussian bumps on an n x m grid."""
    rng = np.random.default_rng(seed)
    rows = np.arange(n, dtype=np.float64)[:, None]
    cols = np.arange(m, dtype=np.float64)[None, :]
    field = np.zeros((n, m), dtype=np.float64)
    for _ in range(2):
        r0 = rng.uniform(0.2, 0.8) * (n - 1)
        c0 = rng.uniform(0.2, 0.8) * (m - 1)
        amp = rng.uniform(0.5, 1.0)
        width = rng.uniform(0.08, 0.2) * max(n, m)
        field += amp * np.exp(-((rows - r0) ** 2 + (cols - c0) ** 2) / (2 * width**2))
    return field.astype(np_dtype(dtype))


def jacobi_step(field: np.ndarray) -> np.ndarray:
    """One accurate timestep: interior 4-neighbor average, fixed boundary.

    Neighbors are scaled then summed in [up, down, left, right] order; see
    the module docstring for why the order matters.
    """
    c = field.dtype.type(0.25)
    out = field.copy()
    out[1:-1, 1:-1] = (
        field[:-2, 1:-1] * c
        + field[2:, 1:-1] * c
        + field[1:-1, :-2] * c
        + field[1:-1, 2:] * c
    )
    return out


def reference_trajectory(field0: np.ndarray, steps: int) -> list[np.ndarray]:
    """states[0..steps], computed without touching the runtime."""
    states = [field0.copy()]
    for _ in range(steps):
        states.append(jacobi_step(states[-1]))
    return states


def _ml_directive(config: BenchConfig) -> str:
    if config.mode == "collect":
        return f'ml(collect) in(t) out(tnew) db("{config.db_path}")'
    if config.mode == "infer":
        return (
            f'ml(infer) in(t) out(tnew) model("{config.model_path}")'
            " if(interleave_schedule)"
        )
    return (
        f"ml(predicated:host_condition) in(t) out(tnew)"
        f' db("{config.db_path}") model("{config.model_path}")'
    )


def run_stencil(config: BenchConfig) -> BenchReport:
    if config.app != "stencil":
        raise ValueError("config.app must be 'stencil'")
    n, m, steps = config.n, config.m, config.steps
    field0 = initial_field(n, m, config.seed, config.dtype)

    t0 = time.perf_counter_ns()
    states = reference_trajectory(field0, steps)
    accurate_wall = max(time.perf_counter_ns() - t0, 1)

    env = {"N": n, "M": m}
    ifnctr = parse_directive(IN_FUNCTOR)
    ofnctr = parse_directive(OUT_FUNCTOR)
    map_to = parse_directive(MAP_TO, env)
    map_from = parse_directive(MAP_FROM, env)
    ml = parse_ml_clause(_ml_directive(config))

    t_buf = ArrayBuffer.from_numpy(field0.copy())
    tnew_buf = ArrayBuffer.from_numpy(field0.copy())
    t_np = t_buf.to_numpy()
    tnew_np = tnew_buf.to_numpy()

    def do_timestep():
        tnew_np[:, :] = jacobi_step(t_np)

    desc = RegionDescriptor(
        name=REGION_NAME,
        accurate_fn=do_timestep,
        ml=ml,
        in_maps=[BoundMap(ifnctr, map_to.targets[0], t_buf)],
        out_maps=[BoundMap(ofnctr, map_from.targets[0], tnew_buf)],
        env=env,
    )

    n_acc, n_sur = config.interleave
    per_step_rmse = []
    wall = 0
    with Runtime() as rt:
        handle = rt.register_region(desc)
        for step in range(steps):
            t0 = time.perf_counter_ns()
            if config.mode == "collect":
                rt.invoke_region(handle)
            elif config.mode == "infer":
                rt.invoke_region(
                    handle, if_value=interleave_predicate(step, n_acc, n_sur)
                )
            else:
                rt.invoke_region(
                    handle,
                    predicate_value=interleave_predicate(step, n_acc, n_sur),
                )
            t_np[:, :] = tnew_np
            wall += time.perf_counter_ns() - t0
            per_step_rmse.append(compute_rmse(t_np, states[step + 1]))
        stats = rt.stats(handle)

    return BenchReport(
        app="stencil",
        mode=config.mode,
        steps=steps,
        qoi_metric="rmse",
        qoi_error=per_step_rmse[-1],
        speedup=accurate_wall / max(wall, 1),
        wall_ns=max(wall, 1),
        accurate_wall_ns=accurate_wall,
        time_map_to_ns=stats.map_to_ns,
        time_map_from_ns=stats.map_from_ns,
        time_infer_ns=stats.infer_ns,
        time_accurate_ns=stats.accurate_ns,
        records_written=stats.records,
        accurate_calls=stats.accurate_calls,
        surrogate_calls=stats.surrogate_calls,
        per_step_rmse=per_step_rmse,
    )
