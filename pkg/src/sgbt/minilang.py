"""Two executable mini-languages over one shared AST, plus a word-level pivot.

LangJ is brace-and-semicolon structured::

    func f ( a ) { let x = a + 1 ; return x ; }

LangP is indentation structured (4-space unit, indent/dedent tokens)::

    def f ( a ) :
        x = a + 1
        return x

The pivot is a controlled verbalization of the AST in prefix word order
("function f with a begin give plus a 1 end"). It deliberately merges
``<``/``<=`` into "less", ``>``/``>=`` into "greater", and let/assign into
"set", so a round trip through the pivot loses information.

All operations here are pure functions; the module has no mutable state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class Lang(Enum):
    """Surface language tag carried by every token sequence."""

    J = "j"
    P = "p"
    PIVOT = "pivot"


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "int-literal"
    OP = "operator"
    PUNCT = "punct"
    INDENT = "indent"
    DEDENT = "dedent"
    WORD = "word"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str


@dataclass(frozen=True)
class TokenSeq:
    """A surface token sequence tagged with its language."""

    lang: Lang
    tokens: tuple[Token, ...]

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = IntLit | Var | Binary | Call


@dataclass(frozen=True)
class Let:
    var: str
    value: Expr


@dataclass(frozen=True)
class Assign:
    var: str
    value: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Return:
    value: Expr


Stmt = Let | Assign | If | While | Return


@dataclass(frozen=True)
class Function:
    """A single function: the unit every corpus, model, and metric consumes."""

    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]


BINARY_OPS = ("+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
BUILTIN_ARITY = {"abs": 1, "min": 2, "max": 2}

J_KEYWORDS = frozenset({"func", "let", "if", "else", "while", "return"})
P_KEYWORDS = frozenset({"def", "if", "else", "while", "return"})
# Structural token texts of LangP; rejected as identifiers. "nl" is the
# statement separator: it marks a line break between two statements at the
# same indentation level (never before a dedent), so LangJ's inter-statement
# ";" has a LangP counterpart token.
P_RESERVED = frozenset({"indent", "dedent", "nl"})

PIVOT_WORDS = frozenset(
    {
        "function", "with", "and", "begin", "end", "set", "give", "then",
        "when", "holds", "otherwise", "repeat", "while",
        "plus", "minus", "times", "over", "rem",
        "less", "greater", "same", "differ",
        "abs", "min", "max",
    }
)

OP_TO_PIVOT = {
    "+": "plus", "-": "minus", "*": "times", "/": "over", "%": "rem",
    "<": "less", "<=": "less", ">": "greater", ">=": "greater",
    "==": "same", "!=": "differ",
}

_INDENT_TOKEN = Token(TokenKind.INDENT, "indent")
_DEDENT_TOKEN = Token(TokenKind.DEDENT, "dedent")
_NL_TOKEN = Token(TokenKind.PUNCT, "nl")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")
# Two-char operators must be matched before their one-char prefixes.
_OPERATORS = ("<=", ">=", "==", "!=", "<", ">", "+", "-", "*", "/", "%")
_PUNCTS = ("(", ")", "{", "}", ",", ";", ":", "=")


class LexError(Exception):
    def __init__(self, line: int, col: int, reason: str):
        super().__init__(f"line {line}, col {col}: {reason}")
        self.line = line
        self.col = col
        self.reason = reason


class ParseError(Exception):
    def __init__(self, position: int, expected: str, found: str):
        super().__init__(f"at token {position}: expected {expected}, found {found!r}")
        self.position = position
        self.expected = expected
        self.found = found


class UnboundVariable(Exception):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class ArityMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# Lexing
# ---------------------------------------------------------------------------

def _lex_line(line: str, lineno: int, lang: Lang) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch == " ":
            i += 1
            continue
        if ch == "\t":
            raise LexError(lineno, i + 1, "tab character")
        m = _IDENT_RE.match(line, i)
        if m:
            word = m.group()
            tokens.append(_classify_word(word, lineno, i + 1, lang))
            i = m.end()
            continue
        m = _INT_RE.match(line, i)
        if m:
            tokens.append(Token(TokenKind.INT, m.group()))
            i = m.end()
            continue
        for op in _OPERATORS:
            if line.startswith(op, i):
                # "=" followed by "=" is the comparison operator, handled above.
                tokens.append(Token(TokenKind.OP, op))
                i += len(op)
                break
        else:
            if ch in _PUNCTS:
                tokens.append(Token(TokenKind.PUNCT, ch))
                i += 1
            else:
                raise LexError(lineno, i + 1, f"illegal character {ch!r}")
    return tokens


def _classify_word(word: str, line: int, col: int, lang: Lang) -> Token:
    if lang is Lang.J:
        if word in J_KEYWORDS:
            return Token(TokenKind.KEYWORD, word)
        return Token(TokenKind.IDENT, word)
    if lang is Lang.P:
        if word in P_KEYWORDS:
            return Token(TokenKind.KEYWORD, word)
        if word in P_RESERVED:
            raise LexError(line, col, f"reserved word {word!r}")
        return Token(TokenKind.IDENT, word)
    if word in PIVOT_WORDS:
        return Token(TokenKind.WORD, word)
    return Token(TokenKind.IDENT, word)


def lex(source_text: str, lang: Lang) -> TokenSeq:
    """Tokenize source text. LangP synthesizes indent/dedent from leading spaces."""
    if not source_text.strip():
        raise LexError(1, 1, "empty input")
    if lang is not Lang.P:
        tokens: list[Token] = []
        for lineno, line in enumerate(source_text.split("\n"), start=1):
            tokens.extend(_lex_line(line, lineno, lang))
        return TokenSeq(lang, tuple(tokens))

    tokens = []
    level = 0
    first = True
    for lineno, line in enumerate(source_text.split("\n"), start=1):
        if not line.strip():
            continue
        stripped = line.lstrip(" ")
        if stripped.startswith("\t"):
            raise LexError(lineno, len(line) - len(stripped) + 1, "tab character")
        spaces = len(line) - len(stripped)
        if spaces % 4 != 0:
            raise LexError(lineno, 1, f"indentation of {spaces} is not a multiple of 4")
        new_level = spaces // 4
        if new_level > level + 1:
            raise LexError(lineno, 1, f"indentation jumps from {level} to {new_level}")
        if new_level == level + 1:
            tokens.append(_INDENT_TOKEN)
        elif new_level < level:
            while level > new_level:
                tokens.append(_DEDENT_TOKEN)
                level -= 1
        elif not first:
            tokens.append(_NL_TOKEN)
        level = new_level
        tokens.extend(_lex_line(stripped, lineno, Lang.P))
        first = False
    while level > 0:
        tokens.append(_DEDENT_TOKEN)
        level -= 1
    return TokenSeq(Lang.P, tuple(tokens))


def tokens_from_texts(texts: list[str], lang: Lang) -> TokenSeq:
    """Re-type a bare text sequence (e.g. a decoded hypothesis) into tokens.

    Unknown words become identifiers; downstream parsing decides whether the
    sequence is meaningful. Never raises.
    """
    out: list[Token] = []
    for text in texts:
        if lang is Lang.P and text in P_RESERVED:
            out.append({"indent": _INDENT_TOKEN, "dedent": _DEDENT_TOKEN, "nl": _NL_TOKEN}[text])
        elif (lang is Lang.J and text in J_KEYWORDS) or (lang is Lang.P and text in P_KEYWORDS):
            out.append(Token(TokenKind.KEYWORD, text))
        elif lang is Lang.PIVOT and text in PIVOT_WORDS:
            out.append(Token(TokenKind.WORD, text))
        elif _INT_RE.fullmatch(text):
            out.append(Token(TokenKind.INT, text))
        elif text in _OPERATORS:
            out.append(Token(TokenKind.OP, text))
        elif text in _PUNCTS:
            out.append(Token(TokenKind.PUNCT, text))
        elif _IDENT_RE.fullmatch(text):
            out.append(Token(TokenKind.IDENT, text))
        else:
            out.append(Token(TokenKind.IDENT, text))
    return TokenSeq(lang, tuple(out))


# ---------------------------------------------------------------------------
# Rendering (inverse of lex on canonical output)
# ---------------------------------------------------------------------------

def render_text(ts: TokenSeq) -> str:
    """Render tokens to canonical text: single-space joined for LangJ and the
    pivot, 4-space indented lines for LangP. Tolerant of malformed sequences
    (model output may be arbitrary)."""
    if ts.lang is not Lang.P:
        return " ".join(ts.texts()) + "\n"

    lines: list[str] = []
    cur: list[str] = []
    level = 0

    def flush() -> None:
        nonlocal cur
        if cur:
            lines.append("    " * level + " ".join(cur))
            cur = []

    toks = ts.tokens
    for i, tok in enumerate(toks):
        if tok.kind is TokenKind.INDENT:
            flush()
            level += 1
        elif tok.kind is TokenKind.DEDENT:
            flush()
            level = max(level - 1, 0)
        elif tok.text == "nl" and tok.kind is TokenKind.PUNCT:
            flush()
        else:
            if cur and _starts_statement(toks, i):
                flush()
            cur.append(tok.text)
            if tok.text == ":":
                flush()
    flush()
    return "\n".join(lines) + ("\n" if lines else "")


def _starts_statement(toks: tuple[Token, ...], i: int) -> bool:
    text = toks[i].text
    if text in ("def", "if", "while", "return", "else"):
        return True
    # An identifier immediately followed by "=" opens an assignment; "="
    # cannot occur inside an expression.
    if toks[i].kind is TokenKind.IDENT and i + 1 < len(toks) and toks[i + 1].text == "=":
        return True
    return False


# ---------------------------------------------------------------------------
# Printing (AST -> tokens)
# ---------------------------------------------------------------------------

_PRECEDENCE = {op: 1 for op in COMPARE_OPS}
_PRECEDENCE.update({"+": 2, "-": 2})
_PRECEDENCE.update({"*": 3, "/": 3, "%": 3})


def _print_expr(e: Expr, out: list[Token], parent_prec: int, right_side: bool) -> None:
    if isinstance(e, IntLit):
        out.append(Token(TokenKind.INT, str(e.value)))
    elif isinstance(e, Var):
        out.append(Token(TokenKind.IDENT, e.name))
    elif isinstance(e, Call):
        out.append(Token(TokenKind.IDENT, e.func))
        out.append(Token(TokenKind.PUNCT, "("))
        for i, arg in enumerate(e.args):
            if i:
                out.append(Token(TokenKind.PUNCT, ","))
            _print_expr(arg, out, 0, False)
        out.append(Token(TokenKind.PUNCT, ")"))
    else:
        prec = _PRECEDENCE[e.op]
        # Left associative everywhere: parenthesize an equal-precedence child
        # only on the right, a lower-precedence child always.
        need = prec < parent_prec or (prec == parent_prec and right_side)
        if need:
            out.append(Token(TokenKind.PUNCT, "("))
        _print_expr(e.left, out, prec, False)
        out.append(Token(TokenKind.OP, e.op))
        _print_expr(e.right, out, prec, True)
        if need:
            out.append(Token(TokenKind.PUNCT, ")"))


def _expr_tokens(e: Expr) -> list[Token]:
    out: list[Token] = []
    _print_expr(e, out, 0, False)
    return out


def _print_condition(e: Expr, out: list[Token]) -> None:
    # Conditions are parenthesized in both surfaces; the canonical LangP
    # form keeps them so the two surfaces stay token-aligned.
    out.append(Token(TokenKind.PUNCT, "("))
    out.extend(_expr_tokens(e))
    out.append(Token(TokenKind.PUNCT, ")"))


def _print_stmt_j(s: Stmt, out: list[Token]) -> None:
    kw = lambda t: Token(TokenKind.KEYWORD, t)
    punct = lambda t: Token(TokenKind.PUNCT, t)
    if isinstance(s, Let):
        out += [kw("let"), Token(TokenKind.IDENT, s.var), punct("=")]
        out += _expr_tokens(s.value)
        out.append(punct(";"))
    elif isinstance(s, Assign):
        out += [Token(TokenKind.IDENT, s.var), punct("=")]
        out += _expr_tokens(s.value)
        out.append(punct(";"))
    elif isinstance(s, Return):
        out.append(kw("return"))
        out += _expr_tokens(s.value)
        out.append(punct(";"))
    elif isinstance(s, If):
        out.append(kw("if"))
        _print_condition(s.cond, out)
        out.append(punct("{"))
        for st in s.then:
            _print_stmt_j(st, out)
        out.append(punct("}"))
        if s.orelse is not None:
            out += [kw("else"), punct("{")]
            for st in s.orelse:
                _print_stmt_j(st, out)
            out.append(punct("}"))
    else:
        out.append(kw("while"))
        _print_condition(s.cond, out)
        out.append(punct("{"))
        for st in s.body:
            _print_stmt_j(st, out)
        out.append(punct("}"))


def _print_block_p(stmts: tuple[Stmt, ...], out: list[Token]) -> None:
    # The separator follows a simple statement with a successor; block
    # statements already end in a dedent whose line break carries no token.
    # This mirrors LangJ, where ";" terminates simple statements only.
    for i, st in enumerate(stmts):
        if i and isinstance(stmts[i - 1], (Let, Assign, Return)):
            out.append(_NL_TOKEN)
        _print_stmt_p(st, out)


def _print_stmt_p(s: Stmt, out: list[Token]) -> None:
    kw = lambda t: Token(TokenKind.KEYWORD, t)
    punct = lambda t: Token(TokenKind.PUNCT, t)

    def block(stmts: tuple[Stmt, ...]) -> None:
        out.append(punct(":"))
        out.append(_INDENT_TOKEN)
        _print_block_p(stmts, out)
        out.append(_DEDENT_TOKEN)

    if isinstance(s, (Let, Assign)):
        # LangP has no declaration keyword; first assignment introduces.
        out += [Token(TokenKind.IDENT, s.var), punct("=")]
        out += _expr_tokens(s.value)
    elif isinstance(s, Return):
        out.append(kw("return"))
        out += _expr_tokens(s.value)
    elif isinstance(s, If):
        out.append(kw("if"))
        _print_condition(s.cond, out)
        block(s.then)
        if s.orelse is not None:
            out.append(kw("else"))
            block(s.orelse)
    else:
        out.append(kw("while"))
        _print_condition(s.cond, out)
        block(s.body)


def _print_pivot_expr(e: Expr, out: list[Token]) -> None:
    word = lambda t: Token(TokenKind.WORD, t)
    if isinstance(e, IntLit):
        out.append(Token(TokenKind.INT, str(e.value)))
    elif isinstance(e, Var):
        out.append(Token(TokenKind.IDENT, e.name))
    elif isinstance(e, Call):
        out.append(word(e.func))
        for arg in e.args:
            _print_pivot_expr(arg, out)
    else:
        out.append(word(OP_TO_PIVOT[e.op]))
        _print_pivot_expr(e.left, out)
        _print_pivot_expr(e.right, out)


def _print_block_pivot(stmts: tuple[Stmt, ...], out: list[Token]) -> None:
    # "then" connects a simple statement to its successor, mirroring the
    # LangJ ";" and LangP "nl" separators.
    for i, st in enumerate(stmts):
        if i and isinstance(stmts[i - 1], (Let, Assign, Return)):
            out.append(Token(TokenKind.WORD, "then"))
        _print_stmt_pivot(st, out)


def _print_stmt_pivot(s: Stmt, out: list[Token]) -> None:
    word = lambda t: Token(TokenKind.WORD, t)

    def block(stmts: tuple[Stmt, ...]) -> None:
        out.append(word("begin"))
        _print_block_pivot(stmts, out)
        out.append(word("end"))

    if isinstance(s, (Let, Assign)):
        out += [word("set"), Token(TokenKind.IDENT, s.var)]
        _print_pivot_expr(s.value, out)
    elif isinstance(s, Return):
        out.append(word("give"))
        _print_pivot_expr(s.value, out)
    elif isinstance(s, If):
        out.append(word("when"))
        _print_pivot_expr(s.cond, out)
        out.append(word("holds"))
        block(s.then)
        if s.orelse is not None:
            out.append(word("otherwise"))
            block(s.orelse)
    else:
        out += [word("repeat"), word("while")]
        _print_pivot_expr(s.cond, out)
        out.append(word("holds"))
        block(s.body)


def print_ast(fn: Function, lang: Lang) -> TokenSeq:
    """Pretty-print to the canonical token sequence of the given surface."""
    out: list[Token] = []
    punct = lambda t: Token(TokenKind.PUNCT, t)
    if lang is Lang.J:
        out += [Token(TokenKind.KEYWORD, "func"), Token(TokenKind.IDENT, fn.name), punct("(")]
        for i, p in enumerate(fn.params):
            if i:
                out.append(punct(","))
            out.append(Token(TokenKind.IDENT, p))
        out += [punct(")"), punct("{")]
        for st in fn.body:
            _print_stmt_j(st, out)
        out.append(punct("}"))
        return TokenSeq(Lang.J, tuple(out))
    if lang is Lang.P:
        out += [Token(TokenKind.KEYWORD, "def"), Token(TokenKind.IDENT, fn.name), punct("(")]
        for i, p in enumerate(fn.params):
            if i:
                out.append(punct(","))
            out.append(Token(TokenKind.IDENT, p))
        out += [punct(")"), punct(":"), _INDENT_TOKEN]
        _print_block_p(fn.body, out)
        out.append(_DEDENT_TOKEN)
        return TokenSeq(Lang.P, tuple(out))
    word = lambda t: Token(TokenKind.WORD, t)
    out += [word("function"), Token(TokenKind.IDENT, fn.name)]
    for i, p in enumerate(fn.params):
        out.append(word("with" if i == 0 else "and"))
        out.append(Token(TokenKind.IDENT, p))
    out.append(word("begin"))
    _print_block_pivot(fn.body, out)
    out.append(word("end"))
    return TokenSeq(Lang.PIVOT, tuple(out))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, ts: TokenSeq):
        self.tokens = ts.tokens
        self.lang = ts.lang
        self.pos = 0
        self.bound: set[str] = set()

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        return ParseError(self.pos, expected, tok.text if tok else "<eof>")

    def expect_text(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            raise self.error(repr(text))
        self.pos += 1
        return tok

    def expect_kind(self, kind: TokenKind, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            raise self.error(what)
        self.pos += 1
        return tok

    def at_text(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    # -- expressions (shared by both surfaces) --

    def parse_expr(self) -> Expr:
        left = self.parse_additive()
        while (tok := self.peek()) is not None and tok.text in COMPARE_OPS:
            self.pos += 1
            left = Binary(tok.text, left, self.parse_additive())
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while (tok := self.peek()) is not None and tok.text in ("+", "-"):
            self.pos += 1
            left = Binary(tok.text, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_atom()
        while (tok := self.peek()) is not None and tok.text in ("*", "/", "%"):
            self.pos += 1
            left = Binary(tok.text, left, self.parse_atom())
        return left

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.error("expression")
        if tok.kind is TokenKind.INT:
            self.pos += 1
            return IntLit(int(tok.text))
        if tok.text == "(":
            self.pos += 1
            e = self.parse_expr()
            self.expect_text(")")
            return e
        if tok.kind is TokenKind.IDENT:
            nxt = self.peek(1)
            if nxt is not None and nxt.text == "(":
                return self.parse_call()
            self.pos += 1
            return Var(tok.text)
        raise self.error("expression")

    def parse_call(self) -> Expr:
        name_tok = self.expect_kind(TokenKind.IDENT, "builtin name")
        if name_tok.text not in BUILTIN_ARITY:
            raise ParseError(self.pos - 1, "builtin name (abs, min, max)", name_tok.text)
        self.expect_text("(")
        args: list[Expr] = [self.parse_expr()]
        while self.at_text(","):
            self.pos += 1
            args.append(self.parse_expr())
        self.expect_text(")")
        if len(args) != BUILTIN_ARITY[name_tok.text]:
            raise ParseError(self.pos - 1, f"{BUILTIN_ARITY[name_tok.text]} argument(s) to {name_tok.text}", f"{len(args)} given")
        return Call(name_tok.text, tuple(args))

    # -- LangJ statements --

    def parse_j_block(self) -> tuple[Stmt, ...]:
        self.expect_text("{")
        stmts: list[Stmt] = []
        while not self.at_text("}"):
            if self.at_text(";"):  # stray separators are skipped
                self.pos += 1
                continue
            stmts.append(self.parse_j_stmt())
        self.expect_text("}")
        if not stmts:
            raise ParseError(self.pos - 1, "nonempty block", "}")
        return tuple(stmts)

    def _eat_semi(self) -> None:
        # Canonical output always carries ";"; the parser accepts its absence
        # so near-miss token streams remain executable.
        if self.at_text(";"):
            self.pos += 1

    def parse_j_stmt(self) -> Stmt:
        tok = self.peek()
        if tok is None:
            raise self.error("statement")
        if tok.text == "let":
            self.pos += 1
            name = self.expect_kind(TokenKind.IDENT, "variable name")
            self.expect_text("=")
            value = self.parse_expr()
            self._eat_semi()
            return Let(name.text, value)
        if tok.text == "return":
            self.pos += 1
            value = self.parse_expr()
            self._eat_semi()
            return Return(value)
        if tok.text == "if":
            self.pos += 1
            self.expect_text("(")
            cond = self.parse_expr()
            self.expect_text(")")
            then = self.parse_j_block()
            orelse = None
            if self.at_text("else"):
                self.pos += 1
                orelse = self.parse_j_block()
            return If(cond, then, orelse)
        if tok.text == "while":
            self.pos += 1
            self.expect_text("(")
            cond = self.parse_expr()
            self.expect_text(")")
            return While(cond, self.parse_j_block())
        if tok.kind is TokenKind.IDENT:
            name = tok.text
            self.pos += 1
            self.expect_text("=")
            value = self.parse_expr()
            self._eat_semi()
            return Assign(name, value)
        raise self.error("statement")

    # -- LangP statements --
    #
    # LangP has no declaration keyword: the first assignment to a name
    # introduces it, so the parser synthesizes Let there. `bound` tracks
    # textual-order introductions.

    def _skip_separators(self) -> None:
        # Statement separators are skippable wherever a statement may start,
        # so near-miss token streams stay parseable.
        while (tok := self.peek()) is not None and tok.text == "nl":
            self.pos += 1

    def parse_p_block(self) -> tuple[Stmt, ...]:
        self.expect_text(":")
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.INDENT:
            raise self.error("indented block")
        self.pos += 1
        stmts: list[Stmt] = []
        self._skip_separators()
        while (tok := self.peek()) is not None and tok.kind is not TokenKind.DEDENT:
            stmts.append(self.parse_p_stmt())
            self._skip_separators()
        if self.peek() is None:
            raise self.error("dedent")
        self.pos += 1
        if not stmts:
            raise ParseError(self.pos - 1, "nonempty block", "dedent")
        return tuple(stmts)

    def parse_p_stmt(self) -> Stmt:
        tok = self.peek()
        if tok is None:
            raise self.error("statement")
        if tok.text == "return":
            self.pos += 1
            return Return(self.parse_expr())
        if tok.text == "if":
            self.pos += 1
            cond = self.parse_expr()
            then = self.parse_p_block()
            orelse = None
            if self.at_text("else"):
                self.pos += 1
                orelse = self.parse_p_block()
            return If(cond, then, orelse)
        if tok.text == "while":
            self.pos += 1
            cond = self.parse_expr()
            return While(cond, self.parse_p_block())
        if tok.kind is TokenKind.IDENT:
            name = tok.text
            self.pos += 1
            self.expect_text("=")
            value = self.parse_expr()
            if name not in self.bound:
                self.bound.add(name)
                return Let(name, value)
            return Assign(name, value)
        raise self.error("statement")


def parse(ts: TokenSeq) -> Function:
    """Parse a LangJ or LangP token sequence into a checked Function."""
    if ts.lang not in (Lang.J, Lang.P):
        raise ValueError(f"cannot parse language {ts.lang}")
    p = _Parser(ts)
    if ts.lang is Lang.J:
        p.expect_text("func")
        name = p.expect_kind(TokenKind.IDENT, "function name")
        params = _parse_params(p)
        body = p.parse_j_block()
    else:
        p.expect_text("def")
        name = p.expect_kind(TokenKind.IDENT, "function name")
        params = _parse_params(p)
        p.bound.update(params)
        body = p.parse_p_block()
    if p.pos != len(p.tokens):
        raise p.error("<eof>")
    fn = Function(name.text, params, body)
    check_bindings(fn)
    return fn


def _parse_params(p: _Parser) -> tuple[str, ...]:
    p.expect_text("(")
    params: list[str] = []
    if not p.at_text(")"):
        params.append(p.expect_kind(TokenKind.IDENT, "parameter name").text)
        while p.at_text(","):
            p.pos += 1
            params.append(p.expect_kind(TokenKind.IDENT, "parameter name").text)
    p.expect_text(")")
    return tuple(params)


def check_bindings(fn: Function) -> None:
    """Static check: every Var or Assign refers to a param or a textually
    earlier Let. Raises UnboundVariable on the first violation."""
    bound = set(fn.params)

    def check_expr(e: Expr) -> None:
        if isinstance(e, Var):
            if e.name not in bound:
                raise UnboundVariable(e.name)
        elif isinstance(e, Binary):
            check_expr(e.left)
            check_expr(e.right)
        elif isinstance(e, Call):
            for a in e.args:
                check_expr(a)

    def check_block(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Let):
                check_expr(s.value)
                bound.add(s.var)
            elif isinstance(s, Assign):
                if s.var not in bound:
                    raise UnboundVariable(s.var)
                check_expr(s.value)
            elif isinstance(s, Return):
                check_expr(s.value)
            elif isinstance(s, If):
                check_expr(s.cond)
                check_block(s.then)
                if s.orelse is not None:
                    check_block(s.orelse)
            else:
                check_expr(s.cond)
                check_block(s.body)

    check_block(fn.body)


# ---------------------------------------------------------------------------
# Interpreter
# ---------------------------------------------------------------------------

class FaultKind(Enum):
    DIVISION_BY_ZERO = "division_by_zero"
    UNDEFINED_VARIABLE = "undefined_variable"


@dataclass(frozen=True)
class Value:
    value: int


@dataclass(frozen=True)
class Fault:
    kind: FaultKind


@dataclass(frozen=True)
class Timeout:
    pass


ExecOutcome = Value | Fault | Timeout

# Values whose magnitude exceeds this bit length abort as Timeout: they can
# only arise from runaway loops and would otherwise exhaust memory before the
# step limit fires.
VALUE_BIT_LIMIT = 4096


class _Abort(Exception):
    def __init__(self, outcome: ExecOutcome):
        self.outcome = outcome


class _ReturnSignal(Exception):
    def __init__(self, value: int):
        self.value = value


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def interpret(fn: Function, args: list[int], step_limit: int = 10000) -> ExecOutcome:
    """Execute with the given integer arguments.

    Integers are arbitrary precision; division truncates toward zero and the
    remainder follows the dividend's sign; comparisons yield 1/0; falling off
    the end returns 0. One step is charged per statement execution and per
    loop iteration check.
    """
    if len(args) != len(fn.params):
        raise ArityMismatch(f"expected {len(fn.params)} args, got {len(args)}")
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    env = dict(zip(fn.params, args))
    steps = 0

    def charge() -> None:
        nonlocal steps
        steps += 1
        if steps > step_limit:
            raise _Abort(Timeout())

    def guard(v: int) -> int:
        if v.bit_length() > VALUE_BIT_LIMIT:
            raise _Abort(Timeout())
        return v

    def ev(e: Expr) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Var):
            if e.name not in env:
                raise _Abort(Fault(FaultKind.UNDEFINED_VARIABLE))
            return env[e.name]
        if isinstance(e, Call):
            vals = [ev(a) for a in e.args]
            if e.func == "abs":
                return abs(vals[0])
            if e.func == "min":
                return min(vals)
            return max(vals)
        left = ev(e.left)
        right = ev(e.right)
        op = e.op
        if op == "+":
            return guard(left + right)
        if op == "-":
            return guard(left - right)
        if op == "*":
            return guard(left * right)
        if op in ("/", "%"):
            if right == 0:
                raise _Abort(Fault(FaultKind.DIVISION_BY_ZERO))
            q = _trunc_div(left, right)
            return q if op == "/" else left - q * right
        if op == "<":
            return int(left < right)
        if op == "<=":
            return int(left <= right)
        if op == ">":
            return int(left > right)
        if op == ">=":
            return int(left >= right)
        if op == "==":
            return int(left == right)
        return int(left != right)

    def run_block(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            charge()
            if isinstance(s, (Let, Assign)):
                if isinstance(s, Assign) and s.var not in env:
                    raise _Abort(Fault(FaultKind.UNDEFINED_VARIABLE))
                env[s.var] = ev(s.value)
            elif isinstance(s, Return):
                raise _ReturnSignal(ev(s.value))
            elif isinstance(s, If):
                if ev(s.cond) != 0:
                    run_block(s.then)
                elif s.orelse is not None:
                    run_block(s.orelse)
            else:
                while True:
                    if ev(s.cond) == 0:
                        break
                    run_block(s.body)
                    charge()

    try:
        run_block(fn.body)
    except _ReturnSignal as r:
        return Value(r.value)
    except _Abort as a:
        return a.outcome
    return Value(0)


# ---------------------------------------------------------------------------
# Dataflow
# ---------------------------------------------------------------------------

def dataflow_edges(fn: Function) -> frozenset[tuple]:
    """Reaching-definition edges over anonymized variables.

    Variables are renamed var_0, var_1, ... in order of first definition
    (params first). A definition reaches a use if some control-flow path from
    the definition arrives at the use; definitions accumulate (an assignment
    does not erase earlier ones), If joins both branches, While iterates the
    body-to-entry join to a fixpoint. Each edge is

        (var, def_site, use_site)

    with def_site ("param", index) or ("stmt", statement_id) and use_site
    ("stmt", statement_id, occurrence). Statement ids number statements in
    textual order; occurrence counts Var uses inside one statement's own
    expressions left to right. Identical under consistent renaming.
    """
    rename: dict[str, str] = {}

    def anon(name: str) -> str:
        if name not in rename:
            rename[name] = f"var_{len(rename)}"
        return rename[name]

    for p in fn.params:
        anon(p)

    # Pre-assign statement ids in textual order, keyed by structural path so
    # a node object reused in two positions still gets distinct ids.
    stmt_ids: dict[tuple, int] = {}
    counter = 0

    def number(stmts: tuple[Stmt, ...], path: tuple) -> None:
        nonlocal counter
        for i, s in enumerate(stmts):
            here = path + (i,)
            stmt_ids[here] = counter
            counter += 1
            if isinstance(s, If):
                number(s.then, here + ("t",))
                if s.orelse is not None:
                    number(s.orelse, here + ("e",))
            elif isinstance(s, While):
                number(s.body, here + ("b",))

    number(fn.body, ())

    edges: set[tuple] = set()
    Defs = dict[str, frozenset[tuple]]

    def expr_uses(e: Expr, acc: list[str]) -> None:
        if isinstance(e, Var):
            acc.append(e.name)
        elif isinstance(e, Binary):
            expr_uses(e.left, acc)
            expr_uses(e.right, acc)
        elif isinstance(e, Call):
            for a in e.args:
                expr_uses(a, acc)

    def record_uses(e: Expr, sid: int, reaching: Defs, start: int = 0) -> int:
        names: list[str] = []
        expr_uses(e, names)
        for occ, name in enumerate(names, start=start):
            v = anon(name)
            for site in reaching.get(v, frozenset()):
                edges.add((v, site, ("stmt", sid, occ)))
        return start + len(names)

    def add_def(reaching: Defs, name: str, site: tuple) -> Defs:
        v = anon(name)
        new = dict(reaching)
        new[v] = new.get(v, frozenset()) | {site}
        return new

    def merge(a: Defs, b: Defs) -> Defs:
        out = dict(a)
        for k, v in b.items():
            out[k] = out.get(k, frozenset()) | v
        return out

    def walk(stmts: tuple[Stmt, ...], path: tuple, reaching: Defs) -> Defs:
        for i, s in enumerate(stmts):
            here = path + (i,)
            sid = stmt_ids[here]
            if isinstance(s, (Let, Assign)):
                record_uses(s.value, sid, reaching)
                reaching = add_def(reaching, s.var, ("stmt", sid))
            elif isinstance(s, Return):
                record_uses(s.value, sid, reaching)
            elif isinstance(s, If):
                record_uses(s.cond, sid, reaching)
                then_out = walk(s.then, here + ("t",), reaching)
                else_out = walk(s.orelse, here + ("e",), reaching) if s.orelse is not None else reaching
                reaching = merge(then_out, else_out)
            else:
                state = reaching
                while True:
                    record_uses(s.cond, sid, state)
                    out = walk(s.body, here + ("b",), state)
                    new = merge(state, out)
                    if new == state:
                        break
                    state = new
                reaching = state
        return reaching

    entry: Defs = {anon(p): frozenset({("param", i)}) for i, p in enumerate(fn.params)}
    walk(fn.body, (), entry)
    return frozenset(edges)
