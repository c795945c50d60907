"""Benchmark reports and their serializations.

The json form carries every field below. The csv form is long-format with
a `key,step,value` header: scalar fields appear once with an empty step
column, and the per-step RMSE series appears as one `step_rmse` row per
step, ready for plotting.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

__all__ = ["BenchReport", "emit_report"]


@dataclass
class BenchReport:
    app: str
    mode: str
    steps: int
    qoi_metric: str
    qoi_error: float
    speedup: float
    wall_ns: int
    accurate_wall_ns: int
    time_map_to_ns: int = 0
    time_map_from_ns: int = 0
    time_infer_ns: int = 0
    time_accurate_ns: int = 0
    records_written: int = 0
    accurate_calls: int = 0
    surrogate_calls: int = 0
    per_step_rmse: Optional[list[float]] = field(default=None)

    def __post_init__(self):
        if self.speedup <= 0:
            raise ValueError("speedup must be positive")

    @property
    def map_share(self) -> float:
        """Fraction of bridge+inference time spent mapping (the overhead
        decomposition of the runtime library)."""
        mapping = self.time_map_to_ns + self.time_map_from_ns
        total = mapping + self.time_infer_ns
        return mapping / total if total else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["map_share"] = self.map_share
        return d


def emit_report(report: BenchReport, format: str = "text") -> str:
    if format == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if format == "csv":
        return _to_csv(report)
    if format == "text":
        return _to_text(report)
    raise ValueError(f"unknown report format {format!r}")


def _to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "step", "value"])
    d = report.to_dict()
    series = d.pop("per_step_rmse")
    for key, value in d.items():
        w.writerow([key, "", value])
    if series is not None:
        for step, value in enumerate(series):
            w.writerow(["step_rmse", step, repr(value)])
    return buf.getvalue()


def _ms(ns: int) -> str:
    return f"{ns / 1e6:.3f} ms"


def _to_text(report: BenchReport) -> str:
    lines = [
        f"app:             {report.app} ({report.mode}, {report.steps} step(s))",
        f"qoi {report.qoi_metric}:        {report.qoi_error:.6g}",
        f"speedup:         {report.speedup:.3f}x"
        f" (accurate {_ms(report.accurate_wall_ns)} / run {_ms(report.wall_ns)})",
        f"map to/from:     {_ms(report.time_map_to_ns)} / {_ms(report.time_map_from_ns)}"
        f" (share of runtime work: {100 * report.map_share:.1f}%)",
        f"inference:       {_ms(report.time_infer_ns)}",
        f"accurate region: {_ms(report.time_accurate_ns)}",
        f"calls:           {report.accurate_calls} accurate,"
        f" {report.surrogate_calls} surrogate, {report.records_written} record(s)",
    ]
    if report.per_step_rmse:
        lines.append(f"final step rmse: {report.per_step_rmse[-1]:.6g}")
    return "\n".join(lines) + "\n"
