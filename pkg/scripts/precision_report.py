#!/usr/bin/env python3
"""Depth overhead and precision table for the bundled examples.

For each example: the computation depth of the concrete spec, the depth of
its abstract counterpart realized with concrete operators only, and the
optimal versus abstract ignorance on the bundled lossy trace.  This is the
comparison methodology of the empirical evaluation; absolute figures depend
on the macro expansion and traces, so only the relationships carry over
(overhead > 1, optimal <= abstract, equality for the simple reset/filter
examples).
"""

from fractions import Fraction

from gapstream.abstract import FiniteUniverse
from gapstream.builtin_specs import IGNORANCE_SETUPS, SPEC_NAMES, spec_text, trace_text
from gapstream.encoded import build_encoded
from gapstream.ignorance import (BoundedIntervalSpace, FiniteSetSpace,
                                 compare_ignorance)
from gapstream.speclang import abstractify, computation_depth, flatten, parse_spec, unroll
from gapstream.tracefile import parse_trace


def main():
    header = f"{'example':22s} {'d':>3s} {'d#':>4s} {'d#/d':>5s} {'optimal':>9s} {'abstract':>9s}"
    print(header)
    print("-" * len(header))
    for name in SPEC_NAMES:
        ast = parse_spec(spec_text(name))
        d = computation_depth(flatten(ast))
        d_abs = build_encoded(flatten(abstractify(ast)), Fraction(1, 2)).depth()
        opt = abs_ign = ""
        if name in IGNORANCE_SETUPS:
            setup = IGNORANCE_SETUPS[name]
            tr = parse_trace(trace_text(setup.trace_key))
            concrete = flatten(ast)
            abstract = flatten(unroll(abstractify(ast, time_aware=setup.time_aware)))
            uni = FiniteUniverse.of(setup.grid, setup.values, dict(setup.per_stream))
            if setup.measure == "set":
                space = FiniteSetSpace(uni.values_for(setup.output))
            else:
                _, lo, hi = setup.measure
                space = BoundedIntervalSpace(lo, hi)
            inputs = {n: tr.streams[n] for n in concrete.inputs}
            o, a = compare_ignorance(concrete, abstract, inputs, uni,
                                     setup.output, space)
            opt, abs_ign = f"{float(o):.3f}", f"{float(a):.3f}"
        print(f"{name:22s} {d:3d} {d_abs:4d} {d_abs / d:5.1f} {opt:>9s} {abs_ign:>9s}")


if __name__ == "__main__":
    main()
