"""Spec language: parsing, graphs, well-formedness, transformations."""

from dataclasses import replace
import pytest

from gapstream.builtin_specs import SPEC_NAMES, spec_text
from gapstream.errors import (ArityMismatch, SpecSyntaxError, UnknownIdentifier,
                              UnsupportedRecursionShape)
from gapstream.speclang import (abstractify, check_well_formed,
                                computation_depth, flatten, format_spec,
                                parse_spec, unroll)

APP_A = """
in x : Events[Unit]
def y := merge(lift(inc)(last(y, x)), const(0)(unit()))
out y
"""


class TestParsing:
    def test_reset_sum_parses(self):
        ast = parse_spec(spec_text("reset-sum"))
        assert len(ast.defs) == 3
        assert ast.outputs == ("cond", "sum")

    def test_self_reference_parses(self):
        ast = parse_spec("in y : Events[Int]\ndef x := last(x, y)\nout x\n")
        assert len(ast.defs) == 1

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifier):
            parse_spec("in y : Events[Int]\ndef x := lift(frobnicate)(y)\nout x\n")

    def test_unknown_operator(self):
        with pytest.raises(UnknownIdentifier):
            parse_spec("in y : Events[Int]\ndef x := frobnicate(y)\nout x\n")

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            parse_spec("in y : Events[Int]\ndef x := last(y)\nout x\n")

    def test_undefined_stream(self):
        with pytest.raises(UnknownIdentifier):
            parse_spec("in y : Events[Int]\ndef x := time(zz)\nout x\n")

    def test_syntax_error_carries_line(self):
        with pytest.raises(SpecSyntaxError) as e:
            parse_spec("in y : Events[Int]\ndef x := time(y\nout x\n")
        assert "line 2" in str(e.value)

    def test_roundtrip_all_bundled(self):
        for name in SPEC_NAMES:
            ast = parse_spec(spec_text(name))
            again = parse_spec(format_spec(ast))
            assert replace(again, mode=ast.mode) == ast

    def test_roundtrip_transformed(self):
        ast = abstractify(parse_spec(spec_text("reset-sum")), time_aware=True)
        again = parse_spec(format_spec(ast))
        assert replace(again, mode="abstract") == ast
        un = unroll(ast)
        again = parse_spec(format_spec(un))
        assert replace(again, mode="abstract") == un


class TestWellFormedness:
    def test_guarded_recursion_ok(self):
        assert check_well_formed(flatten(parse_spec(APP_A))) is None

    def test_unguarded_cycle_reported(self):
        ast = parse_spec("in y : Events[Int]\ndef x := merge(x, y)\nout x\n")
        report = check_well_formed(flatten(ast))
        assert report is not None
        assert "x" in report.cycle

    def test_abstract_last_recursion_needs_unrolling(self):
        ast = abstractify(parse_spec(APP_A))
        report = check_well_formed(flatten(ast))
        assert report is not None
        fixed = unroll(ast)
        assert check_well_formed(flatten(fixed)) is None

    def test_unrollable_limit(self):
        ast = parse_spec("in y : Events[Int]\ndef x := merge(x, y)\nout x\n")
        with pytest.raises(UnsupportedRecursionShape):
            unroll(replace(ast, mode="abstract"))


class TestAbstractify:
    def test_structure_preserved(self):
        for name in SPEC_NAMES:
            ast = parse_spec(spec_text(name))
            ab = abstractify(ast)
            g1, g2 = flatten(ast), flatten(ab)
            assert len(g1.equations) == len(g2.equations)
            deps1 = sorted((a, b) for a, b, _ in g1.dependencies())
            deps2 = sorted((a, b) for a, b, _ in g2.dependencies())
            assert deps1 == deps2

    def test_operator_mapping(self):
        ab = abstractify(parse_spec(APP_A))
        text = format_spec(ab)
        assert "last_abs" in text and "merge_abs" in text
        assert "lift_abs" in text and "const_abs" in text

    def test_time_aware_patterns(self):
        ast = parse_spec(spec_text("reset-sum"))
        ab = abstractify(ast, time_aware=True)
        assert "slift_time(leq)(values, resets)" in format_spec(ab)
        ast2 = parse_spec(spec_text("filter-example"))
        ab2 = abstractify(ast2, time_aware=True)
        assert "last_time(values, values)" in format_spec(ab2)


class TestUnroll:
    def test_four_equation_pattern(self):
        ab = abstractify(parse_spec(APP_A))
        un = unroll(ab)
        text = format_spec(un)
        assert "last_bot(" in text and "last_gap(" in text
        # value half feeds the final stream, gap half takes the primed clone
        assert check_well_formed(flatten(un)) is None

    def test_non_recursive_unchanged(self):
        ast = abstractify(parse_spec(spec_text("filter-example")))
        assert unroll(ast) == ast

    def test_mutual_recursion_self_updating_queue(self):
        ab = abstractify(parse_spec(spec_text("self-updating-queue")))
        un = unroll(ab)
        assert check_well_formed(flatten(un)) is None
        assert "delay_bot(" in format_spec(un)


class TestDepth:
    def test_single_lift(self):
        ast = parse_spec("in y : Events[Int]\ndef x := lift(inc)(y)\nout x\n")
        assert computation_depth(flatten(ast)) == 1

    def test_longest_path(self):
        ast = parse_spec(
            "in y : Events[Int]\n"
            "def a := lift(inc)(y)\n"
            "def b := lift(inc)(a)\n"
            "def c := merge(a, b)\n"
            "out c\n")
        assert computation_depth(flatten(ast)) == 3

    def test_reset_sum_depths(self):
        ast = parse_spec(spec_text("reset-sum"))
        d = computation_depth(flatten(ast))
        d_abs = computation_depth(flatten(abstractify(ast)))
        # same node/edge shape, but the abstract last no longer guards,
        # so paths through it start counting
        assert d > 0 and d_abs >= d
