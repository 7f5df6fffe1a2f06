"""Concrete syntax: lexing, parsing, errors, and the print/parse round trip."""

import random

import pytest

from flipc import syntax as S
from flipc.errors import ParseError
from flipc.generate import GenConfig, random_program
from flipc.parser import parse_expr, parse_program, pretty_expr, pretty_program
from flipc.suites import benchmark_names, benchmark_text


class TestParse:
    def test_chain_program_structure(self):
        program = parse_program(benchmark_text("chain_small.dice"))
        assert program.functions == []
        lets = 0
        e = program.main
        while isinstance(e, S.Let):
            lets += 1
            e = e.body
        assert lets == 3
        flips = sum(1 for n in S.walk_nodes(program.main) if isinstance(n, S.Flip))
        assert flips == 5

    def test_empty_input_is_an_error(self):
        with pytest.raises(ParseError):
            parse_program("")

    def test_flip_probability_range_checked_at_parse_time(self):
        with pytest.raises(ParseError) as err:
            parse_program("let x = flip 1.5 in x")
        assert err.value.span is not None
        assert "1.5" in str(err.value)

    def test_fraction_probabilities(self):
        e = parse_expr("flip 1/3")
        assert isinstance(e, S.Flip)
        assert e.theta == pytest.approx(1 / 3, abs=0)

    def test_true_false_aliases(self):
        assert parse_expr("T") == S.Lit(True)
        assert parse_expr("F") == S.Lit(False)
        assert parse_expr("true") == S.Lit(True)

    def test_literal_tuple_folds_to_value(self):
        assert parse_expr("(true, false)") == S.Lit((True, False))
        assert parse_expr("(true, (false, true))") == S.Lit((True, (False, True)))

    def test_multi_argument_call_equals_tuple_argument_call(self):
        a = parse_program("fun f(x: Bool, y: Bool): Bool { x } f(true, flip 0.5)")
        b = parse_program("fun f(x: Bool, y: Bool): Bool { x } f((true, flip 0.5))")
        assert a == b

    def test_operator_precedence(self):
        # ! binds tighter than &&, which binds tighter than ||, then ==.
        e = parse_expr("!a && b || c == d")
        assert isinstance(e, S.Eq)
        assert isinstance(e.left, S.Or)
        assert isinstance(e.left.left, S.And)
        assert isinstance(e.left.left.left, S.Not)

    def test_left_associativity(self):
        e = parse_expr("a || b || c")
        assert isinstance(e, S.Or) and isinstance(e.left, S.Or)

    def test_line_comments(self):
        program = parse_program("// a comment\nlet x = flip 0.5 in // tail\nx")
        assert isinstance(program.main, S.Let)

    def test_reserved_prefix_rejected(self):
        with pytest.raises(ParseError):
            parse_program("let $t0 = flip 0.5 in $t0")

    def test_keywords_not_identifiers(self):
        with pytest.raises(ParseError):
            parse_program("let in = flip 0.5 in in")

    def test_error_span_points_into_input(self):
        text = "let x = flip 0.5 in\n??"
        with pytest.raises(ParseError) as err:
            parse_program(text)
        span = err.value.span
        assert span is not None
        assert 1 <= span.start_line <= text.count("\n") + 1

    def test_iterate_and_int_syntax(self):
        program = parse_program(
            "fun f(x: int(4)): int(4) { x + int(4, 1) } iterate(f, int(4, 0), 3)"
        )
        assert isinstance(program.main, S.Iterate)
        assert program.main.count == 3

    def test_int_literal_range_checked(self):
        with pytest.raises(ParseError):
            parse_expr("int(4, 7)")


class TestPrettyPrint:
    def test_value_printing(self):
        assert pretty_expr(S.Lit(True)) == "true"
        assert pretty_expr(S.Tup(S.Ident("x"), S.Ident("y"))) == "(x, y)"

    def test_bundled_benchmarks_round_trip(self):
        for name in benchmark_names():
            first = parse_program(benchmark_text(name), name)
            printed = pretty_program(first)
            second = parse_program(printed, name)
            assert first == second, name

    def test_random_programs_round_trip(self):
        rng = random.Random(7)
        for _ in range(500):
            program = random_program(rng, GenConfig(max_flips=30, max_depth=4))
            printed = pretty_program(program)
            assert parse_program(printed) == program
