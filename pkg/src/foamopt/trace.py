"""Per-iteration records shared by every solver and the harness."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields

__all__ = ["TraceRecord", "TRACE_HEADER", "trace_to_csv"]


@dataclass(frozen=True)
class TraceRecord:
    outer_k: int
    grad_count: int
    prox_count: int
    accuracy: float
    inner_iters: int = 0
    lyapunov: float = math.nan
    wall_nanos: int = 0


TRACE_HEADER = tuple(f.name for f in fields(TraceRecord))


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def trace_to_csv(records, with_timing: bool = True) -> str:
    """Render records as CSV text with the fixed header.

    ``with_timing=False`` blanks the ``wall_nanos`` column, which is the only
    non-deterministic field.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for rec in records:
        row = [_fmt(v) for v in astuple(rec)]
        if not with_timing:
            row[-1] = ""
        writer.writerow(row)
    return buf.getvalue()
