"""Trace file format: declarations, timed directives, one progress footer.

    stream values : Int
    stream resets : Unit
    epsilon 1
    1: values = 3
    8: gap values
    9: values = #top
    10: known values
    progress 14

Gap directives follow the boolean-marker convention: `t: gap s` opens an
unknown region at t inclusive, `t: known s` closes it at t exclusive, so a
point-sized loss on an integer-grid trace is `t: gap s` + `t+1: known s`.
An event line inside an open gap punches a known point into it.

Serialization is grid-canonical: gap boundaries are sampled on the epsilon
grid, so parse and serialize are mutually inverse on canonical files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .abstract import AbstractEventStream
from .encoding import grid_canonical
from .errors import OutOfOrderInput, TraceError, UndeclaredStream
from .streams import EventStream, Progress
from .timeline import INF, Span, TimeSet, as_time
from .values import TOP, UNIT, Interval

TRACE_TYPES = ("Unit", "Bool", "Int", "Real", "AbsBool", "Interval")


@dataclass
class Trace:
    declarations: Tuple[Tuple[str, str], ...]
    epsilon: Fraction
    progress: Progress
    streams: Dict[str, object]  # EventStream or AbstractEventStream

    def types(self) -> Dict[str, str]:
        return dict(self.declarations)

    def is_abstract(self) -> bool:
        return any(isinstance(s, AbstractEventStream) and not s.is_concrete()
                   for s in self.streams.values())

    def horizon(self) -> Fraction:
        if self.progress.is_infinite():
            best = Fraction(0)
            for s in self.streams.values():
                ev = s.stream.events if isinstance(s, AbstractEventStream) else s.events
                if ev:
                    best = max(best, ev[-1][0])
            return best
        return self.progress.time


def _parse_time(text: str, lineno: int) -> Fraction:
    try:
        return as_time(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise TraceError(f"line {lineno}: bad timestamp '{text}'")


def _parse_value(text: str, ty: str, lineno: int):
    text = text.strip()
    if text == "#top":
        if ty == "Interval":
            return Interval.top()
        return TOP
    if ty == "Unit":
        if text == "()":
            return UNIT
        raise TraceError(f"line {lineno}: unit stream takes '()', got '{text}'")
    if ty in ("Bool", "AbsBool"):
        if text in ("true", "false"):
            return text == "true"
        raise TraceError(f"line {lineno}: bad boolean '{text}'")
    if ty == "Interval":
        m = re.fullmatch(r"\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]", text)
        if m:
            return Interval.of(_parse_bound(m.group(1), lineno),
                               _parse_bound(m.group(2), lineno))
        return Interval.single(_parse_number(text, lineno))
    if ty in ("Int", "Real"):
        v = _parse_number(text, lineno)
        if ty == "Int" and v.denominator != 1:
            raise TraceError(f"line {lineno}: integer stream got '{text}'")
        return v
    raise TraceError(f"line {lineno}: unhandled type {ty}")


def _parse_number(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise TraceError(f"line {lineno}: bad number '{text}'")


def _parse_bound(text: str, lineno: int):
    text = text.strip()
    from .values import NEG_INF
    if text == "-inf":
        return NEG_INF
    if text == "inf":
        return INF
    return _parse_number(text, lineno)


@dataclass
class _Builder:
    ty: str
    events: List[Tuple[Fraction, object]] = field(default_factory=list)
    gap_spans: List[Span] = field(default_factory=list)
    open_gap: Optional[Tuple[Fraction, bool]] = None  # (time, start closed)
    last_time: Optional[Fraction] = None
    saw_abstract: bool = False

    def check_order(self, t, lineno):
        if self.last_time is not None and t < self.last_time:
            raise OutOfOrderInput(f"line {lineno}: directive at {t} out of order")
        self.last_time = t

    def event(self, t, v, lineno):
        self.check_order(t, lineno)
        if self.events and t <= self.events[-1][0]:
            raise OutOfOrderInput(f"line {lineno}: event at {t} out of order")
        if self.open_gap is not None:
            start, closed = self.open_gap
            if t > start or (t == start and closed):
                if t > start:
                    self.gap_spans.append(Span(start, closed, t, False))
                self.open_gap = (t, False)
        self.events.append((t, v))
        if v is TOP or isinstance(v, Interval) and not v.is_single():
            self.saw_abstract = True

    def gap(self, t, lineno):
        self.check_order(t, lineno)
        if self.open_gap is not None:
            raise TraceError(f"line {lineno}: gap already open")
        self.open_gap = (t, True)
        self.saw_abstract = True

    def known(self, t, lineno):
        self.check_order(t, lineno)
        if self.open_gap is None:
            raise TraceError(f"line {lineno}: no gap to close")
        start, closed = self.open_gap
        if t > start:
            self.gap_spans.append(Span(start, closed, t, False))
        elif t == start and not closed:
            pass
        self.open_gap = None

    def finish(self, progress: Progress, abstract_type: bool):
        if self.open_gap is not None:
            start, closed = self.open_gap
            self.gap_spans.append(Span(start, closed, INF, False))
            self.open_gap = None
        stream = EventStream.of(self.events, progress)
        if self.gap_spans or self.saw_abstract or abstract_type:
            return AbstractEventStream.of(stream, TimeSet(self.gap_spans))
        return stream


def parse_trace(text: str) -> Trace:
    declarations: List[Tuple[str, str]] = []
    builders: Dict[str, _Builder] = {}
    epsilon = Fraction(1)
    progress: Optional[Progress] = None
    saw_body = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip() if "#top" not in raw else _strip_comment_keep_top(raw)
        line = line.strip()
        if not line:
            continue
        if line.startswith("stream "):
            m = re.fullmatch(r"stream\s+(\w+)\s*:\s*(\w+)", line)
            if not m:
                raise TraceError(f"line {lineno}: bad stream declaration")
            name, ty = m.group(1), m.group(2)
            if ty not in TRACE_TYPES:
                raise TraceError(f"line {lineno}: unknown type '{ty}'")
            if name in builders:
                raise TraceError(f"line {lineno}: duplicate stream '{name}'")
            declarations.append((name, ty))
            builders[name] = _Builder(ty)
            continue
        if line.startswith("epsilon "):
            if saw_body:
                raise TraceError(f"line {lineno}: epsilon must precede events")
            epsilon = _parse_number(line.split(None, 1)[1], lineno)
            if epsilon <= 0:
                raise TraceError(f"line {lineno}: epsilon must be positive")
            continue
        if line.startswith("progress"):
            arg = line.split(None, 1)[1].strip()
            progress = (Progress.infinite() if arg == "inf"
                        else Progress.inclusive_at(_parse_time(arg, lineno)))
            continue
        m = re.fullmatch(r"([^:]+):\s*(.*)", line)
        if not m:
            raise TraceError(f"line {lineno}: unrecognized directive")
        saw_body = True
        t = _parse_time(m.group(1).strip(), lineno)
        body = m.group(2).strip()
        gm = re.fullmatch(r"(gap|known)\s+(\w+)", body)
        if gm:
            kind, name = gm.group(1), gm.group(2)
            b = builders.get(name)
            if b is None:
                raise UndeclaredStream(f"line {lineno}: undeclared stream '{name}'")
            (b.gap if kind == "gap" else b.known)(t, lineno)
            continue
        em = re.fullmatch(r"(\w+)\s*=\s*(.+)", body)
        if not em:
            raise TraceError(f"line {lineno}: unrecognized directive '{body}'")
        name, lit = em.group(1), em.group(2)
        b = builders.get(name)
        if b is None:
            raise UndeclaredStream(f"line {lineno}: undeclared stream '{name}'")
        b.event(t, _parse_value(lit, b.ty, lineno), lineno)

    if progress is None:
        raise TraceError("missing progress directive")
    streams = {
        name: b.finish(progress, abstract_type=b.ty in ("AbsBool", "Interval"))
        for name, b in builders.items()
    }
    return Trace(tuple(declarations), epsilon, progress, streams)


def _strip_comment_keep_top(raw: str) -> str:
    # '#top' is a literal; any other '#' starts a comment
    out = []
    i = 0
    while i < len(raw):
        if raw[i] == "#":
            if raw.startswith("#top", i):
                out.append("#top")
                i += 4
                continue
            break
        out.append(raw[i])
        i += 1
    return "".join(out)


def format_value(v) -> str:
    if v is UNIT:
        return "()"
    if v is TOP:
        return "#top"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, Interval):
        if v.is_top():
            return "#top"
        if v.is_single():
            return format_time(v.lo)
        lo = "-inf" if not isinstance(v.lo, Fraction) else format_time(v.lo)
        hi = "inf" if not isinstance(v.hi, Fraction) else format_time(v.hi)
        return f"[{lo}, {hi}]"
    if isinstance(v, Fraction):
        return format_time(v)
    if isinstance(v, int):
        return str(v)
    raise TraceError(f"value {v!r} has no trace representation")


def format_time(t: Fraction) -> str:
    if t.denominator == 1:
        return str(t.numerator)
    scaled = t
    digits = 0
    while scaled.denominator != 1 and digits < 12:
        scaled *= 10
        digits += 1
    if scaled.denominator == 1:
        s = str(t.numerator * 10**digits // t.denominator)
        sign = "-" if t < 0 else ""
        s = s.lstrip("-").rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}"
    return f"{t.numerator}/{t.denominator}"


def serialize_trace(declarations, streams: Dict[str, object], epsilon,
                    progress: Progress) -> str:
    """Canonical text form; gap boundaries snapped to the epsilon grid."""
    epsilon = Fraction(epsilon)
    lines = [f"stream {n} : {ty}" for n, ty in declarations]
    if epsilon != 1:
        lines.append(f"epsilon {format_time(epsilon)}")
    horizon = progress.time if not progress.is_infinite() else None
    directives = []  # (time, order, text)
    for name, _ty in declarations:
        s = streams[name]
        if isinstance(s, AbstractEventStream):
            stream, gaps = s.stream, s.gaps
        else:
            stream, gaps = s, TimeSet.empty()
        stream = stream.truncated(stream.progress.min(progress))
        for t, v in stream.events:
            directives.append((t, 1, f"{format_time(t)}: {name} = {format_value(v)}"))
        end = horizon if horizon is not None else _last_feature(stream, gaps)
        for sp in grid_canonical(gaps, epsilon, end).spans:
            directives.append((sp.lo, 2, f"{format_time(sp.lo)}: gap {name}"))
            if sp.hi is not INF and (horizon is None or t_le_frac(sp.hi, end)):
                directives.append((sp.hi, 0, f"{format_time(sp.hi)}: known {name}"))
    directives.sort(key=lambda d: (d[0], d[1], d[2]))
    lines += [d[2] for d in directives]
    lines.append("progress " + ("inf" if progress.is_infinite()
                                else format_time(progress.time)))
    return "\n".join(lines) + "\n"


def t_le_frac(a: Fraction, b: Fraction) -> bool:
    return a <= b


def _last_feature(stream: EventStream, gaps: TimeSet) -> Fraction:
    best = Fraction(0)
    if stream.events:
        best = stream.events[-1][0]
    for b in gaps.boundaries():
        best = max(best, b)
    return best
