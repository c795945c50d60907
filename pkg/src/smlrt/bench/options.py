"""American-option pricing mini-app: a pointwise analytic kernel whose
per-record cost dwarfs a small MLP, making it a natural surrogate target.

Each record is (spot, strike, maturity, rate, volatility) drawn from seeded
uniform ranges; the accurate kernel prices an American put on a
Cox-Ross-Rubinstein binomial tree of configurable depth, vectorized across
the portfolio. The tensor functors are identity feature maps over the
record array, so one region invocation prices the whole portfolio.
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
    "generate_options",
    "binomial_put_prices",
    "run_options",
]

REGION_NAME = "options"

IN_FUNCTOR = "functor(optin: [k, 0:5] = ([k, 0:5]))"
OUT_FUNCTOR = "functor(optout: [k, 0:1] = ([k]))"
MAP_TO = "map(to: optin(recs[0:N]))"
MAP_FROM = "map(from: optout(price[0:N]))"

# (low, high) sampling ranges per record column
_RANGES = (
    (50.0, 150.0),  # spot
    (50.0, 150.0),  # strike
    (0.2, 2.0),  # maturity, years
    (0.01, 0.1),  # risk-free rate
    (0.1, 0.6),  # volatility
)


def generate_options(count: int, seed: int, dtype: str = "f32") -> np.ndarray:
    rng = np.random.default_rng(seed)
    cols = [rng.uniform(lo, hi, size=count) for lo, hi in _RANGES]
    return np.stack(cols, axis=1).astype(np_dtype(dtype))


def binomial_put_prices(records: np.ndarray, depth: int) -> np.ndarray:
    """Price American puts on a CRR tree, vectorized over the portfolio."""
    if depth < 1:
        raise ValueError("tree depth must be >= 1")
    spot, strike, maturity, rate, vol = (records[:, i] for i in range(5))
    dt = maturity / depth
    up = np.exp(vol * np.sqrt(dt))
    down = 1.0 / up
    growth = np.exp(rate * dt)
    disc = 1.0 / growth
    p_up = ((growth - down) / (up - down))[:, None]
    p_dn = 1.0 - p_up
    disc = disc[:, None]

    j = np.arange(depth + 1)
    nodes = spot[:, None] * up[:, None] ** j * down[:, None] ** (depth - j)
    values = np.maximum(strike[:, None] - nodes, 0.0)
    for level in range(depth, 0, -1):
        cont = disc * (p_up * values[:, 1 : level + 1] + p_dn * values[:, :level])
        nodes = spot[:, None] * up[:, None] ** j[:level] * down[:, None] ** (level - 1 - j[:level])
        values = np.maximum(cont, strike[:, None] - nodes)
    return np.ascontiguousarray(values[:, 0], dtype=records.dtype)


def _ml_directive(config: BenchConfig) -> str:
    if config.mode == "collect":
        return f'ml(collect) in(recs) out(price) db("{config.db_path}")'
    if config.mode == "infer":
        return f'ml(infer) in(recs) out(price) model("{config.model_path}")'
    return (
        f"ml(predicated:host_condition) in(recs) out(price)"
        f' db("{config.db_path}") model("{config.model_path}")'
    )


def run_options(config: BenchConfig) -> BenchReport:
    if config.app != "options":
        raise ValueError("config.app must be 'options'")
    records = generate_options(config.n_options, config.seed, config.dtype)

    t0 = time.perf_counter_ns()
    truth = binomial_put_prices(records, config.depth)
    accurate_wall = max(time.perf_counter_ns() - t0, 1)

    env = {"N": config.n_options}
    optin = parse_directive(IN_FUNCTOR)
    optout = parse_directive(OUT_FUNCTOR)
    map_to = parse_directive(MAP_TO, env)
    map_from = parse_directive(MAP_FROM, env)
    ml = parse_ml_clause(_ml_directive(config))

    recs_buf = ArrayBuffer.from_numpy(records.copy())
    price_buf = ArrayBuffer.zeros((config.n_options,), config.dtype)
    recs_np = recs_buf.to_numpy()
    price_np = price_buf.to_numpy()

    def price_portfolio():
        price_np[:] = binomial_put_prices(recs_np, config.depth)

    desc = RegionDescriptor(
        name=REGION_NAME,
        accurate_fn=price_portfolio,
        ml=ml,
        in_maps=[BoundMap(optin, map_to.targets[0], recs_buf)],
        out_maps=[BoundMap(optout, map_from.targets[0], price_buf)],
        env=env,
    )

    wall = 0
    with Runtime() as rt:
        handle = rt.register_region(desc)
        for step in range(config.steps):
            t0 = time.perf_counter_ns()
            if config.mode == "predicated":
                rt.invoke_region(
                    handle,
                    predicate_value=interleave_predicate(step, *config.interleave),
                )
            else:
                rt.invoke_region(handle)
            wall += time.perf_counter_ns() - t0
        stats = rt.stats(handle)

    return BenchReport(
        app="options",
        mode=config.mode,
        steps=config.steps,
        qoi_metric="rmse",
        qoi_error=compute_rmse(price_np, truth),
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
        per_step_rmse=None,
    )
