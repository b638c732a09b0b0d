"""Timed queues for sliding-window aggregation, concrete and abstract.

A timed queue is a strictly time-ascending sequence of (timestamp, value)
entries; it represents a piece-wise constant signal segment.  The abstract
variant adds an "unknown before u" boundary: entries older than u are
arbitrary, entries from u on are as stored (with interval values).  Queue
values travel through streams like any other payload, so the registry
entries below make them usable under lift and slift.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .errors import OperatorError
from .functions import (LiftedFunction, _from_interval, _to_interval, abs_add,
                        abs_mul, register, register_parametric, strict,
                        strict_cells)
from .timeline import INF, ExtTime, t_lt, t_min
from .values import TOP, Interval, _ext_le


@dataclass(frozen=True)
class TimedQueue:
    entries: Tuple[Tuple[Fraction, object], ...] = ()

    def __post_init__(self):
        for (a, _), (b, _) in zip(self.entries, self.entries[1:]):
            if not a < b:
                raise OperatorError("queue timestamps must strictly increase")

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        inner = ", ".join(f"{t}:{v}" for t, v in self.entries)
        return f"Q[{inner}]"


EMPTY_QUEUE = TimedQueue()


@dataclass(frozen=True)
class AbstractTimedQueue:
    """Queue with contents unknown before `unknown_before`; interval values."""

    unknown_before: ExtTime
    entries: Tuple[Tuple[Fraction, object], ...] = ()

    @staticmethod
    def top() -> "AbstractTimedQueue":
        return AbstractTimedQueue(INF, ())

    def __repr__(self):
        inner = ", ".join(f"{t}:{v}" for t, v in self.entries)
        return f"Q#[<{self.unknown_before}| {inner}]"


def enq(t: Fraction, d, q: TimedQueue) -> TimedQueue:
    if q.entries and not q.entries[-1][0] < t:
        raise OperatorError(f"enqueue at {t} not after queue end")
    return TimedQueue(q.entries + ((t, d),))


def rem_older(k: Fraction, t: Fraction, q: TimedQueue) -> TimedQueue:
    """Drop entries whose segment ended at or before t - k; clamp the first."""
    entries = list(q.entries)
    cutoff = t - k
    while len(entries) >= 2 and entries[1][0] <= cutoff:
        entries.pop(0)
    if entries:
        t0, d0 = entries[0]
        entries[0] = (max(cutoff, t0), d0)
    return TimedQueue(tuple(entries))


def rem_newer(t: Fraction, q: TimedQueue) -> TimedQueue:
    entries = list(q.entries)
    while entries and entries[-1][0] > t:
        entries.pop()
    return TimedQueue(tuple(entries))


def fold(f, q: TimedQueue, acc, until: Fraction):
    entries = q.entries
    for i, (t1, d) in enumerate(entries):
        t2 = entries[i + 1][0] if i + 1 < len(entries) else until
        acc = f(t1, t2, d, acc)
    return acc


def data_timeout(q: TimedQueue) -> ExtTime:
    if len(q.entries) >= 2:
        return q.entries[1][0]
    return INF


def limit(a, b, d):
    """Clamp d into [a, b]; d may be infinite."""
    if not _ext_le(a, d):
        return a
    if not _ext_le(d, b):
        return b
    return d


def limit_interval(a: Fraction, b: Fraction, d: Interval) -> Interval:
    return Interval(limit(a, b, d.lo), limit(a, b, d.hi))


# -- abstract queue operations ---------------------------------------------

def as_abstract_queue(cell) -> AbstractTimedQueue:
    if cell is TOP:
        return AbstractTimedQueue.top()
    if isinstance(cell, AbstractTimedQueue):
        return cell
    if isinstance(cell, TimedQueue):
        entries = tuple((t, _to_interval(v) or v) for t, v in cell.entries)
        return AbstractTimedQueue(Fraction(0), entries)
    raise OperatorError(f"expected a queue value, got {cell!r}")


def enq_abs(t: Fraction, d, q: AbstractTimedQueue) -> AbstractTimedQueue:
    iv = Interval.top() if d is TOP else (_to_interval(d) or d)
    base = TimedQueue(q.entries)
    return AbstractTimedQueue(q.unknown_before, enq(t, iv, base).entries)


def rem_older_abs(k: Fraction, t: Fraction, q: AbstractTimedQueue) -> AbstractTimedQueue:
    stripped = rem_older(k, t, TimedQueue(q.entries)).entries
    if t_lt(t - k, q.unknown_before):
        return AbstractTimedQueue(q.unknown_before, stripped)
    return AbstractTimedQueue(Fraction(0), stripped)


def rem_newer_abs(t: Fraction, q: AbstractTimedQueue) -> AbstractTimedQueue:
    return AbstractTimedQueue(
        t_min(q.unknown_before, t), rem_newer(t, TimedQueue(q.entries)).entries
    )


def fold_abs(f, q: AbstractTimedQueue, acc, until: Fraction):
    start = acc if q.unknown_before == 0 else TOP
    return fold(f, TimedQueue(q.entries), start, until)


def data_timeout_abs(q: AbstractTimedQueue) -> ExtTime:
    if q.unknown_before == 0:
        return data_timeout(TimedQueue(q.entries))
    return TOP


def enq_bounded(t: Fraction, d, q: AbstractTimedQueue, n: int) -> AbstractTimedQueue:
    if len(q.entries) < n:
        return enq_abs(t, d, q)
    t2 = q.entries[1][0]
    shrunk = AbstractTimedQueue(t2, q.entries[1:])
    return enq_bounded(t, d, shrunk, n)


# -- registry entries --------------------------------------------------------

def _strip_concrete(k):
    def f(t, q):
        return rem_older(k, t, q)

    return f


def _strip_abstract(k):
    def f(t, q):
        return rem_older_abs(k, t, rem_newer_abs(t, as_abstract_queue(q)))

    return f


def _integral_concrete(k):
    def f(q, until):
        def step(a, b, v, acc):
            return acc + v * (b - a) / k

        return fold(step, q, Fraction(0), until)

    return f


def _integral_abstract(k):
    def f(q, until):
        qa = as_abstract_queue(q)

        def step(a, b, v, acc):
            bound = (a - until + k) / k
            acc_iv = Interval.top() if acc is TOP else _to_interval(acc)
            clamped = limit_interval(Fraction(0), bound, acc_iv)
            piece = abs_mul(v, Fraction(b - a) / k)
            return abs_add(_from_interval(clamped), piece)

        out = fold_abs(step, qa, Fraction(0), until)
        if out is TOP:
            return TOP
        return _from_interval(_to_interval(out))

    return f


def _timeout_concrete(k):
    def f(t, q):
        dt = data_timeout(q)
        if dt is INF:
            return INF
        return dt - t + k

    return f


def _timeout_abstract(k):
    def f(t, q):
        dt = data_timeout_abs(as_abstract_queue(q))
        if dt is TOP:
            return TOP
        if dt is INF:
            return INF
        return dt - t + Fraction(k)

    return f


def _enq_concrete(t, d, q):
    return enq(t, d, q)


def _enq_abstract(t, d, q):
    if t is TOP:
        raise OperatorError("enqueue timestamp cannot be unknown")
    return enq_abs(t, d, as_abstract_queue(q))


def _enq_bounded_abstract(n):
    def f(t, d, q):
        return enq_bounded(t, d, as_abstract_queue(q), n)

    return f


register(LiftedFunction("enq", 3, strict(_enq_concrete), strict_cells(_enq_abstract)))

register_parametric(
    "window_strip",
    lambda k: LiftedFunction(
        f"window_strip({k})", 2,
        strict(_strip_concrete(Fraction(k))),
        strict_cells(_strip_abstract(Fraction(k))),
    ),
)

register_parametric(
    "window_integral",
    lambda k: LiftedFunction(
        f"window_integral({k})", 2,
        strict(_integral_concrete(Fraction(k))),
        strict_cells(_integral_abstract(Fraction(k))),
    ),
)

register_parametric(
    "timeout_after",
    lambda k: LiftedFunction(
        f"timeout_after({k})", 2,
        strict(_timeout_concrete(Fraction(k))),
        strict_cells(_timeout_abstract(Fraction(k))),
    ),
)

register_parametric(
    "enq_bounded",
    lambda n: LiftedFunction(
        f"enq_bounded({n})", 3,
        strict(_enq_concrete),
        strict_cells(_enq_bounded_abstract(int(n))),
    ),
)
