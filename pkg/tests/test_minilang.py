"""Lexer, parser, printer, interpreter, and dataflow tests for the mini-languages."""

from __future__ import annotations

import pytest

from sgbt.minilang import (
    ArityMismatch,
    Assign,
    Binary,
    Call,
    Fault,
    FaultKind,
    Function,
    If,
    IntLit,
    Lang,
    Let,
    LexError,
    ParseError,
    Return,
    Timeout,
    TokenKind,
    TokenSeq,
    UnboundVariable,
    Value,
    Var,
    While,
    check_bindings,
    dataflow_edges,
    interpret,
    lex,
    parse,
    print_ast,
    render_text,
    tokens_from_texts,
)

ADD1 = Function("f", ("a",), (Return(Binary("+", Var("a"), IntLit(1))),))

LET_CHAIN = Function(
    "f",
    ("a",),
    (
        Let("x", Var("a")),
        Assign("x", Binary("+", Var("x"), IntLit(1))),
        Return(Var("x")),
    ),
)

NESTED = Function(
    "calc",
    ("a", "b"),
    (
        Assign("a", Binary("*", Var("a"), IntLit(2))),
        If(
            Binary("<", Var("a"), Var("b")),
            (Return(Binary("-", Var("b"), Var("a"))),),
            (
                While(
                    Binary(">", Var("a"), IntLit(0)),
                    (Assign("a", Binary("-", Var("a"), Var("b"))),),
                ),
                Return(Var("a")),
            ),
        ),
        Return(Call("max", (Var("a"), Var("b")))),
    ),
)


class TestLex:
    def test_single_statement(self):
        ts = lex("return 1 ;", Lang.J)
        assert [(t.kind, t.text) for t in ts.tokens] == [
            (TokenKind.KEYWORD, "return"),
            (TokenKind.INT, "1"),
            (TokenKind.PUNCT, ";"),
        ]

    def test_empty_input(self):
        with pytest.raises(LexError, match="empty input"):
            lex("", Lang.J)
        with pytest.raises(LexError):
            lex("   \n  ", Lang.P)

    def test_indent_synthesis(self):
        # Header plus two body lines indented 4 then 8: the indentation stack
        # pushes twice and unwinds twice at end of file.
        text = "def f ( a ) :\n    while ( a ) :\n        a = a - 1\n"
        ts = lex(text, Lang.P)
        kinds = [t.kind for t in ts.tokens]
        assert kinds.count(TokenKind.INDENT) == 2
        assert kinds.count(TokenKind.DEDENT) == 2

    def test_multichar_operators(self):
        ts = lex("a <= b == c != d >= e", Lang.J)
        ops = [t.text for t in ts.tokens if t.kind is TokenKind.OP]
        assert ops == ["<=", "==", "!=", ">="]

    def test_illegal_character(self):
        with pytest.raises(LexError, match="illegal character"):
            lex("return $ ;", Lang.J)

    def test_tab_rejected(self):
        with pytest.raises(LexError, match="tab"):
            lex("def f ( a ) :\n\treturn a\n", Lang.P)

    def test_ragged_indent_rejected(self):
        with pytest.raises(LexError, match="multiple of 4"):
            lex("def f ( a ) :\n   return a\n", Lang.P)
        with pytest.raises(LexError, match="jumps"):
            lex("def f ( a ) :\n        return a\n", Lang.P)

    def test_reserved_words_rejected_in_p(self):
        with pytest.raises(LexError, match="reserved"):
            lex("def f ( indent ) :\n    return 1\n", Lang.P)

    def test_lex_render_roundtrip(self):
        for fn in (ADD1, LET_CHAIN, NESTED):
            for lang in (Lang.J, Lang.P, Lang.PIVOT):
                ts = print_ast(fn, lang)
                assert lex(render_text(ts), lang) == ts


class TestPrint:
    def test_canonical_j(self):
        assert print_ast(ADD1, Lang.J).texts() == [
            "func", "f", "(", "a", ")", "{", "return", "a", "+", "1", ";", "}",
        ]

    def test_canonical_p(self):
        assert print_ast(ADD1, Lang.P).texts() == [
            "def", "f", "(", "a", ")", ":", "indent", "return", "a", "+", "1", "dedent",
        ]

    def test_canonical_pivot(self):
        assert print_ast(ADD1, Lang.PIVOT).texts() == [
            "function", "f", "with", "a", "begin", "give", "plus", "a", "1", "end",
        ]

    def test_pivot_merges_comparisons(self):
        lt = Function("f", ("a",), (Return(Binary("<", Var("a"), IntLit(3))),))
        le = Function("f", ("a",), (Return(Binary("<=", Var("a"), IntLit(3))),))
        assert print_ast(lt, Lang.PIVOT) == print_ast(le, Lang.PIVOT)
        assert print_ast(lt, Lang.J) != print_ast(le, Lang.J)

    def test_pivot_merges_let_assign(self):
        via_let = Function("f", ("a",), (Let("x", Var("a")), Return(Var("x"))))
        via_assign = Function("f", ("a",), (Assign("a", Var("a")), Return(Var("a"))))
        s1 = print_ast(via_let, Lang.PIVOT).texts()
        s2 = print_ast(via_assign, Lang.PIVOT).texts()
        assert s1[5] == s2[5] == "set"

    def test_precedence_parens(self):
        # (a + 1) * b needs parens; a + 1 * b does not.
        grouped = Function(
            "f", ("a", "b"),
            (Return(Binary("*", Binary("+", Var("a"), IntLit(1)), Var("b"))),),
        )
        flat = Function(
            "f", ("a", "b"),
            (Return(Binary("+", Var("a"), Binary("*", IntLit(1), Var("b")))),),
        )
        assert print_ast(grouped, Lang.J).texts() == [
            "func", "f", "(", "a", ",", "b", ")", "{",
            "return", "(", "a", "+", "1", ")", "*", "b", ";", "}",
        ]
        assert print_ast(flat, Lang.J).texts() == [
            "func", "f", "(", "a", ",", "b", ")", "{",
            "return", "a", "+", "1", "*", "b", ";", "}",
        ]

    def test_right_assoc_parens_roundtrip(self):
        # a - (b - c) must keep its parens to round-trip.
        fn = Function(
            "f", ("a", "b", "c"),
            (Return(Binary("-", Var("a"), Binary("-", Var("b"), Var("c")))),),
        )
        for lang in (Lang.J, Lang.P):
            assert parse(print_ast(fn, lang)) == fn


class TestParse:
    @pytest.mark.parametrize("fn", [ADD1, LET_CHAIN, NESTED], ids=["add1", "lets", "nested"])
    @pytest.mark.parametrize("lang", [Lang.J, Lang.P])
    def test_roundtrip(self, fn, lang):
        assert parse(print_ast(fn, lang)) == fn

    def test_parse_error_position(self):
        ts = lex("func f ( a ) { return a + ; }", Lang.J)
        with pytest.raises(ParseError) as exc:
            parse(ts)
        assert exc.value.found == ";"

    def test_unbound_variable(self):
        ts = lex("func f ( a ) { return b ; }", Lang.J)
        with pytest.raises(UnboundVariable) as exc:
            parse(ts)
        assert exc.value.name == "b"

    def test_assign_before_let_unbound(self):
        ts = lex("func f ( a ) { x = 1 ; return x ; }", Lang.J)
        with pytest.raises(UnboundVariable):
            parse(ts)

    def test_missing_semicolons_accepted(self):
        strict = lex("func f ( a ) { a = a + 1 ; return a ; }", Lang.J)
        loose = lex("func f ( a ) { a = a + 1 return a }", Lang.J)
        assert parse(loose) == parse(strict)

    def test_stray_semicolons_skipped(self):
        ts = lex("func f ( a ) { ; a = 1 ; ; return a ; ; }", Lang.J)
        assert parse(ts) == parse(lex("func f ( a ) { a = 1 ; return a ; }", Lang.J))

    def test_p_rejects_semicolons(self):
        with pytest.raises(ParseError):
            parse(lex("def f ( a ) :\n    return a ;\n", Lang.P))

    def test_unparenthesized_p_condition_accepted(self):
        canonical = parse(lex("def f ( a ) :\n    if ( a < 1 ) :\n        return 1\n    return 0\n", Lang.P))
        bare = parse(lex("def f ( a ) :\n    if a < 1 :\n        return 1\n    return 0\n", Lang.P))
        assert canonical == bare

    def test_empty_block_rejected(self):
        with pytest.raises(ParseError):
            parse(lex("func f ( a ) { }", Lang.J))

    def test_unknown_call_rejected(self):
        with pytest.raises(ParseError):
            parse(lex("func f ( a ) { return g ( a ) ; }", Lang.J))

    def test_call_arity_checked(self):
        with pytest.raises(ParseError):
            parse(lex("func f ( a ) { return abs ( a , a ) ; }", Lang.J))

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ParseError):
            parse(lex("func f ( a ) { return a ; } return", Lang.J))

    def test_pivot_not_parseable(self):
        with pytest.raises(ValueError):
            parse(print_ast(ADD1, Lang.PIVOT))


class TestInterpret:
    def test_simple_value(self):
        assert interpret(ADD1, [2]) == Value(3)

    def test_division_by_zero(self):
        fn = Function("f", ("a",), (Return(Binary("/", Var("a"), IntLit(0))),))
        assert interpret(fn, [5]) == Fault(FaultKind.DIVISION_BY_ZERO)

    def test_modulo_by_zero(self):
        fn = Function("f", ("a",), (Return(Binary("%", Var("a"), IntLit(0))),))
        assert interpret(fn, [5]) == Fault(FaultKind.DIVISION_BY_ZERO)

    def test_infinite_loop_times_out(self):
        fn = Function(
            "f", ("a",),
            (
                While(Binary("<", IntLit(1), IntLit(2)), (Let("x", IntLit(1)),)),
                Return(IntLit(0)),
            ),
        )
        assert interpret(fn, [0], step_limit=10000) == Timeout()

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            interpret(ADD1, [1, 2])

    def test_implicit_return_zero(self):
        fn = Function("f", ("a",), (Assign("a", Binary("+", Var("a"), IntLit(1))),))
        assert interpret(fn, [7]) == Value(0)

    @pytest.mark.parametrize(
        "a,b,quot,rem",
        [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1)],
    )
    def test_division_truncates_toward_zero(self, a, b, quot, rem):
        div = Function("f", ("a", "b"), (Return(Binary("/", Var("a"), Var("b"))),))
        mod = Function("f", ("a", "b"), (Return(Binary("%", Var("a"), Var("b"))),))
        assert interpret(div, [a, b]) == Value(quot)
        assert interpret(mod, [a, b]) == Value(rem)

    def test_comparisons_yield_01(self):
        fn = Function("f", ("a", "b"), (Return(Binary("<=", Var("a"), Var("b"))),))
        assert interpret(fn, [1, 1]) == Value(1)
        assert interpret(fn, [2, 1]) == Value(0)

    def test_builtins(self):
        fn = Function(
            "f", ("a", "b"),
            (Return(Call("min", (Call("abs", (Var("a"),)), Var("b")))),),
        )
        assert interpret(fn, [-9, 4]) == Value(4)
        assert interpret(fn, [-3, 4]) == Value(3)

    def test_undefined_variable_at_runtime(self):
        # Built by hand to bypass the static check: the branch defining x may
        # not execute.
        fn = Function(
            "f", ("a",),
            (
                If(Binary(">", Var("a"), IntLit(0)), (Let("x", IntLit(1)),), None),
                Return(Var("x")),
            ),
        )
        assert interpret(fn, [5]) == Value(1)
        assert interpret(fn, [-5]) == Fault(FaultKind.UNDEFINED_VARIABLE)

    def test_deterministic(self):
        for _ in range(3):
            assert interpret(NESTED, [9, 4]) == interpret(NESTED, [9, 4])

    def test_step_limit_monotonicity(self):
        fn = Function(
            "f", ("a",),
            (
                While(Binary(">", Var("a"), IntLit(0)), (Assign("a", Binary("-", Var("a"), IntLit(1))),)),
                Return(Var("a")),
            ),
        )
        # Find the smallest limit that completes, then any larger limit must
        # return the identical value.
        result = interpret(fn, [10], step_limit=10000)
        assert isinstance(result, Value)
        low = next(n for n in range(1, 200) if interpret(fn, [10], step_limit=n) == result)
        for n in (low, low + 1, low + 7, 10 * low):
            assert interpret(fn, [10], step_limit=n) == result
        assert interpret(fn, [10], step_limit=low - 1) == Timeout()

    def test_value_explosion_times_out(self):
        # a doubles forever: the magnitude guard must fire before memory does.
        fn = Function(
            "f", ("a",),
            (
                While(Binary(">", Var("a"), IntLit(0)), (Assign("a", Binary("*", Var("a"), Var("a"))),)),
                Return(Var("a")),
            ),
        )
        assert interpret(fn, [2], step_limit=100000) == Timeout()


class TestCrossSurface:
    @pytest.mark.parametrize("fn", [ADD1, LET_CHAIN, NESTED], ids=["add1", "lets", "nested"])
    def test_semantic_equality(self, fn):
        as_j = parse(print_ast(fn, Lang.J))
        as_p = parse(print_ast(fn, Lang.P))
        for args in ([0] * len(fn.params), [3, 7, 2][: len(fn.params)], [-5, 2, 9][: len(fn.params)]):
            assert interpret(as_j, list(args)) == interpret(as_p, list(args))


class TestDataflow:
    def test_param_to_return(self):
        fn = Function("f", ("a",), (Return(Var("a")),))
        assert dataflow_edges(fn) == frozenset({("var_0", ("param", 0), ("stmt", 0, 0))})

    def test_let_assign_return_has_four_edges(self):
        # defs: a@param, x@stmt0, x@stmt1. uses: a@stmt0, x@stmt1 (reached by
        # stmt0), x@stmt2 (reached by stmt0 and stmt1, definitions accumulate).
        assert len(dataflow_edges(LET_CHAIN)) == 4

    def test_alpha_invariance(self):
        renamed = Function(
            "g",
            ("q",),
            (
                Let("w", Var("q")),
                Assign("w", Binary("+", Var("w"), IntLit(1))),
                Return(Var("w")),
            ),
        )
        assert dataflow_edges(renamed) == dataflow_edges(LET_CHAIN)

    def test_if_joins_both_branches(self):
        fn = Function(
            "f",
            ("a", "b"),
            (
                If(
                    Binary("<", Var("a"), IntLit(0)),
                    (Assign("b", IntLit(1)),),
                    (Assign("b", IntLit(2)),),
                ),
                Return(Var("b")),
            ),
        )
        edges = dataflow_edges(fn)
        # Statements number textually: If=0, branch assigns 1 and 2, Return=3.
        # The final use of b sees its param def and both branch defs.
        uses_of_b = {e for e in edges if e[2][1] == 3}
        assert len(uses_of_b) == 3

    def test_while_body_reaches_own_condition(self):
        fn = Function(
            "f",
            ("a",),
            (
                While(Binary(">", Var("a"), IntLit(0)), (Assign("a", Binary("-", Var("a"), IntLit(1))),)),
                Return(Var("a")),
            ),
        )
        edges = dataflow_edges(fn)
        # Condition use of a (stmt 0) is reached by the param and by the body
        # assignment (stmt 1) after one iteration.
        cond_uses = {e for e in edges if e[2][1] == 0}
        assert ("var_0", ("param", 0), ("stmt", 0, 0)) in cond_uses
        assert ("var_0", ("stmt", 1), ("stmt", 0, 0)) in cond_uses


class TestTokensFromTexts:
    def test_reclassifies_hypothesis_texts(self):
        texts = ["def", "f", "(", "a", ")", ":", "indent", "return", "a", "dedent"]
        ts = tokens_from_texts(texts, Lang.P)
        assert ts == print_ast(Function("f", ("a",), (Return(Var("a")),)), Lang.P)

    def test_garbage_becomes_identifiers(self):
        ts = tokens_from_texts(["give", "xyz", "42", "+"], Lang.J)
        assert [t.kind for t in ts.tokens] == [
            TokenKind.IDENT, TokenKind.IDENT, TokenKind.INT, TokenKind.OP,
        ]


def test_check_bindings_accepts_textual_order():
    # A Let inside a branch binds for textually later statements.
    fn = Function(
        "f", ("a",),
        (
            If(Binary(">", Var("a"), IntLit(0)), (Let("x", IntLit(1)),), None),
            Return(Var("x")),
        ),
    )
    check_bindings(fn)  # static pass; the runtime may still fault


def test_token_seq_len():
    assert len(print_ast(ADD1, Lang.J)) == 12
