"""Core operators on concrete event streams.

The six primitives are nil, unit, time, lift, last and delay; const, merge
and slift are derived from them.  Every operator returns the longest prefix
of its semantic result that is decided by the inputs' progress, so outputs
grow monotonically as inputs grow, which is what fixed-point evaluation
needs.

Progress propagation follows the per-operator case analysis exactly: an
output timestamp is covered when every case condition at and below it is
decided by the available input prefixes.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .errors import OperatorError
from .streams import EventStream, Progress
from .timeline import INF
from .values import BOTTOM, GAP, TOP, UNIT, UNKNOWN


def _prog_max(a: Progress, b: Progress) -> Progress:
    return b if a.leq(b) else a


def _prog_min_all(progs: Sequence[Progress]) -> Progress:
    out = progs[0]
    for p in progs[1:]:
        out = out.min(p)
    return out


def nil() -> EventStream:
    return EventStream.of((), Progress.infinite())


def unit() -> EventStream:
    return EventStream.of(((Fraction(0), UNIT),), Progress.infinite())


def time(s: EventStream) -> EventStream:
    return EventStream.of(((t, t) for t, _ in s.events), s.progress)


def lift(f: Callable, *streams: EventStream) -> EventStream:
    if not streams:
        raise OperatorError("lift needs at least one stream")
    prog = _prog_min_all([s.progress for s in streams])
    times = sorted({t for s in streams for t in s.ticks() if prog.covers(t)})
    events = []
    for t in times:
        out = f(*(s.at(t) for s in streams))
        if out is BOTTOM:
            continue
        if out in (UNKNOWN, GAP):
            raise OperatorError(f"lifted function produced {out!r} on concrete streams")
        events.append((t, out))
    return EventStream.of(events, prog)


def const(c) -> Callable[[EventStream], EventStream]:
    def apply(a: EventStream) -> EventStream:
        return lift(lambda v: BOTTOM if v is BOTTOM else c, a)

    return apply


def _merge_values(*vals):
    for v in vals:
        if v is not BOTTOM:
            return v
    return BOTTOM


def merge(*streams: EventStream) -> EventStream:
    """Combine events, earlier arguments taking precedence at shared timestamps."""
    return lift(_merge_values, *streams)


def _vbot_extent(v: EventStream) -> Progress:
    """Progress of the region where "no value event strictly before t" is known.

    The last operator outputs BOTTOM there regardless of the trigger stream,
    which lets its result extend beyond the trigger's progress.
    """
    if v.progress.is_infinite():
        if not v.events:
            return Progress.infinite()
        return Progress.inclusive_at(v.events[0][0])
    limit = v.progress.time
    if v.events:
        limit = min(limit, v.events[0][0])
    return Progress.inclusive_at(limit)


def last(v: EventStream, r: EventStream) -> EventStream:
    """At each trigger event on r, the most recent prior value on v."""
    main = r.progress
    events = []
    for t in r.ticks():
        if not v.progress.covers_below(t):
            main = main.min(Progress.exclusive(t))
            break
        prev = v.last_event_before(t)
        if prev is not None:
            events.append((t, prev[1]))
    prog = _prog_max(main, _vbot_extent(v))
    events = [(t, d) for t, d in events if main.covers(t)]
    return EventStream.of(events, prog)


def _delay_value_ok(val) -> bool:
    if val is INF:
        return True
    return isinstance(val, Fraction) and val > 0


def delay(d: EventStream, r: EventStream) -> EventStream:
    """Emit a unit event when a requested delay elapses without a reset.

    A delay amount on d arms only if its timestamp carries a reset event or
    an emitted output event; any reset event cancels a pending delay.
    """
    for t, val in d.events:
        if val is TOP:
            raise OperatorError("concrete delay cannot take top-valued amounts")
        if isinstance(val, int) and not isinstance(val, bool):
            val = Fraction(val)
        if not _delay_value_ok(val):
            raise OperatorError(f"delay amount at {t} must be positive or inf, got {val!r}")

    d_vals = {t: (Fraction(val) if isinstance(val, int) and not isinstance(val, bool) else val)
              for t, val in d.events}
    r_ticks = set(r.ticks())

    fires = []
    pending = None  # timeout timestamp of the armed delay, or None
    caps = []

    times = sorted(set(d_vals) | r_ticks)
    i = 0
    agenda = list(times)
    seen = set(agenda)
    while i < len(agenda):
        agenda.sort()
        t = agenda[i]
        i += 1
        fired = False
        if pending is not None and pending == t:
            if r.progress.covers_below(t):
                fires.append(t)
                fired = True
            pending = None
        if t in r_ticks:
            pending = None
        if t in d_vals and (fired or t in r_ticks):
            val = d_vals[t]
            if val is not INF:
                pending = t + val
                if pending not in seen:
                    agenda.append(pending)
                    seen.add(pending)

    # The output is bottom at t when, for every earlier point, either no
    # delay amount hits t exactly, or that point was decidedly unarmed, or
    # a reset event decidedly follows it.  Each unfired hit point whose
    # arming or resetting is not decided caps the progress there.
    fire_set = set(fires)
    for t, val in d_vals.items():
        if val is INF:
            continue
        tau = t + val
        if tau in fire_set:
            continue
        armed = t in r_ticks or t in fire_set
        if armed:
            canceled = any(t < u < tau for u in r_ticks)
            if not canceled and not r.progress.covers_below(tau):
                caps.append(Progress.exclusive(tau))
        elif not r.progress.covers(t):
            caps.append(Progress.exclusive(tau))

    # Points with unknown delay data stay bottom while decidedly unarmed;
    # the first reset event, fired output, or end of reset knowledge beyond
    # the delay stream's coverage ends that.
    if d.progress.is_infinite():
        prog = Progress.infinite()
    else:
        bads = [u for u in (r_ticks | fire_set) if not d.progress.covers(u)]
        if not r.progress.is_infinite():
            bads.append(max(d.progress.time, r.progress.time))
        prog = Progress.inclusive_at(min(bads)) if bads else Progress.infinite()

    for c in caps:
        prog = prog.min(c)
    events = [(t, UNIT) for t in fires if prog.covers(t)]
    return EventStream.of(events, prog)


def slift(f: Callable, *streams: EventStream) -> EventStream:
    """Signal lift: apply a total function to the synchronized last values."""
    if len(streams) == 1:
        return lift(lambda a: BOTTOM if a is BOTTOM else f(a), *streams)
    synced = []
    for i, x in enumerate(streams):
        others = [s for j, s in enumerate(streams) if j != i]
        trigger = merge(*others) if len(others) > 1 else others[0]
        synced.append(merge(x, last(x, trigger)))

    def g(*vals):
        if any(v is BOTTOM for v in vals):
            return BOTTOM
        return f(*vals)

    return lift(g, *synced)
