import math

from foamopt.trace import TRACE_HEADER, TraceRecord, trace_to_csv


def test_header_is_fixed():
    assert TRACE_HEADER == ("outer_k", "grad_count", "prox_count", "accuracy",
                            "inner_iters", "lyapunov", "wall_nanos")


def test_csv_rendering():
    recs = [TraceRecord(0, 1, 0, 2.5, 0, math.nan, 123),
            TraceRecord(1, 9, 8, 0.125, 3, 4.0, 456)]
    text = trace_to_csv(recs)
    lines = text.splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert lines[1] == "0,1,0,2.5,0,,123"
    assert lines[2] == "1,9,8,0.125,3,4.0,456"
    assert trace_to_csv(recs, with_timing=False).splitlines()[2] == "1,9,8,0.125,3,4.0,"


def test_float_round_trip_is_exact():
    val = 0.1 + 0.2
    line = trace_to_csv([TraceRecord(0, 0, 0, val)]).splitlines()[1]
    assert float(line.split(",")[3]) == val
