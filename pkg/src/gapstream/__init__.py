"""Runtime verification for timed event streams with gap-aware abstraction."""

from .abstract import (AbstractEventStream, FiniteUniverse, abstract_of,
                       concretize, refinement_leq)
from .streams import EventStream, Progress
from .timeline import INF, Span, TimeSet
from .values import BOTTOM, GAP, TOP, UNIT, UNKNOWN, Interval

__all__ = [
    "AbstractEventStream", "EventStream", "FiniteUniverse", "Progress",
    "TimeSet", "Span", "Interval", "INF",
    "BOTTOM", "GAP", "TOP", "UNIT", "UNKNOWN",
    "abstract_of", "concretize", "refinement_leq",
]
