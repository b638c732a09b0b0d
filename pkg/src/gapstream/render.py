"""ASCII rendering of traces: one row per stream on the epsilon grid.

Columns are grid instants: '-' covered with no event, 'o' an event, 'T' an
event with unknown payload, '~' inside a gap, blank beyond progress.  Event
values are listed under each row.  Wide traces elide the middle.
"""

from __future__ import annotations

from fractions import Fraction

from .abstract import AbstractEventStream
from .tracefile import Trace, format_time, format_value
from .values import TOP, Interval

MAX_COLUMNS = 100


def render_trace(trace: Trace) -> str:
    eps = trace.epsilon
    horizon = trace.horizon()
    cols = int(horizon / eps) + 1
    times = [i * eps for i in range(cols)]
    elide = cols > MAX_COLUMNS
    shown = times if not elide else times[: MAX_COLUMNS // 2] + times[-MAX_COLUMNS // 2:]

    width = max((len(n) for n, _ in trace.declarations), default=4)
    lines = []
    axis = "".join(_axis_char(t) for t in shown)
    lines.append(f"{'t'.rjust(width)} |{axis}|")
    for name, _ty in trace.declarations:
        s = trace.streams[name]
        if isinstance(s, AbstractEventStream):
            stream, gaps = s.stream, s.gaps
        else:
            stream, gaps = s, None
        row = []
        for t in shown:
            if not stream.progress.covers(t):
                row.append(" ")
            elif t in stream.tick_set():
                v = stream.value_at_tick(t)
                row.append("T" if v is TOP or (isinstance(v, Interval) and v.is_top())
                           else "o")
            elif gaps is not None and gaps.contains(t):
                row.append("~")
            else:
                row.append("-")
        body = "".join(row)
        if elide:
            half = MAX_COLUMNS // 2
            body = body[:half] + ".." + body[half:]
        lines.append(f"{name.rjust(width)} |{body}|")
        vals = "  ".join(
            f"{format_time(t)}:{format_value(v)}" for t, v in stream.events)
        if vals:
            lines.append(f"{' ' * width}  {vals}")
    lines.append(f"{' ' * width}  epsilon={format_time(eps)}  progress="
                 + ("inf" if trace.progress.is_infinite()
                    else format_time(trace.progress.time)))
    return "\n".join(lines) + "\n"


def _axis_char(t: Fraction) -> str:
    if t.denominator == 1 and t.numerator % 5 == 0:
        return "+"
    return "."
