"""Benchmark configuration shared by the stencil and options mini-apps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import BenchError
from ..runtime import interleave_predicate

MODES = ("collect", "infer", "predicated")


@dataclass
class BenchConfig:
    app: str  # "stencil" | "options"
    mode: str = "collect"
    steps: int = 1
    n: int = 32  # stencil rows
    m: int = 32  # stencil cols
    n_options: int = 1024
    depth: int = 64  # binomial tree depth of the accurate options kernel
    interleave: tuple[int, int] = (0, 1)  # (n_accurate, n_surrogate)
    db_path: Optional[str] = None
    model_path: Optional[str] = None
    seed: int = 0
    dtype: str = "f32"

    def __post_init__(self):
        if self.app not in ("stencil", "options"):
            raise BenchError(f"unknown app {self.app!r}")
        if self.mode not in MODES:
            raise BenchError(f"unknown mode {self.mode!r}")
        if self.steps < 1:
            raise BenchError("steps must be >= 1")
        if self.app == "stencil" and (self.n < 3 or self.m < 3):
            raise BenchError("stencil grid must be at least 3x3")
        if self.app == "options" and self.n_options < 1:
            raise BenchError("need at least one option record")
        if self.dtype not in ("f32", "f64"):
            raise BenchError(f"unknown dtype {self.dtype!r}")
        # validates the schedule (raises InvalidScheduleError on 0:0)
        interleave_predicate(0, *self.interleave)
        if self.mode in ("infer", "predicated") and not self.model_path:
            raise BenchError(f"mode {self.mode!r} needs --model")
        if self.mode in ("collect", "predicated") and not self.db_path:
            raise BenchError(f"mode {self.mode!r} needs --db")
