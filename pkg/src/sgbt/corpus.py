"""Dataset construction: synthetic program generation, code/summary pairing,
monolingual pools, deduplication, function extraction, length filtering, and
held-out parallel evaluation sets with unit tests.

All randomness is confined to explicit seeds; every builder is deterministic
per seed. External files are JSON Lines, one object per line:

    monolingual  {"id", "lang", "text"}
    bimodal      {"id", "lang", "code", "summary"}
    eval         {"id", "j", "p", "tests": [[arg..., expected], ...]}
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .minilang import (
    Assign,
    Binary,
    Call,
    Expr,
    Function,
    If,
    IntLit,
    Lang,
    Return,
    Stmt,
    TokenSeq,
    Value,
    Var,
    While,
    interpret,
    lex,
    parse,
    print_ast,
    render_text,
)

# ---------------------------------------------------------------------------
# Hashing and seed streams
# ---------------------------------------------------------------------------

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_FNV_MASK = (1 << 64) - 1


def fnv1a_64(text: str) -> int:
    """FNV-1a 64-bit hash of UTF-8 text; fixed here for reproducibility."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    return h


def derive_seed(master: int, name: str) -> int:
    """Named sub-stream seed, stable across runs and platforms."""
    return fnv1a_64(f"{master}:{name}")


# ---------------------------------------------------------------------------
# Synthetic program generation
# ---------------------------------------------------------------------------

# Small pools on purpose: programs must collide enough in bag-of-token space
# to make cross-language retrieval non-trivial, while staying distinct as
# texts (the dedup acceptance check wants >= 90% unique at 1000 draws).
NAME_POOL = ("f", "g", "h", "calc", "step", "run")
VAR_POOL = ("a", "b", "c", "n", "x", "y")

_STMT_KINDS = ("assign", "if", "while", "return")
_STMT_WEIGHTS = (5, 2, 1, 2)
_ARITH_OPS = ("+", "-", "*", "/", "%")
_ARITH_WEIGHTS = (4, 4, 2, 1, 1)
_COMPARE_POOL = ("<", "<=", ">", ">=", "==", "!=")


def _gen_leaf(rng: random.Random, vars_: tuple[str, ...]) -> Expr:
    if rng.random() < 0.6:
        return Var(rng.choice(vars_))
    return IntLit(rng.randrange(0, 10))


def _gen_expr(rng: random.Random, vars_: tuple[str, ...], depth: int) -> Expr:
    # Left-heavy shapes: the right operand is usually a leaf, so rendered
    # expressions mostly end in a variable or literal rather than ")".
    if depth <= 0 or rng.random() < 0.45:
        return _gen_leaf(rng, vars_)
    roll = rng.random()
    if roll < 0.80:
        op = rng.choices(_ARITH_OPS, weights=_ARITH_WEIGHTS)[0]
        left = _gen_expr(rng, vars_, depth - 1)
        right = _gen_leaf(rng, vars_) if rng.random() < 0.7 else _gen_expr(rng, vars_, depth - 1)
        return Binary(op, left, right)
    if roll < 0.88:
        func = rng.choice(("abs", "min", "max"))
        n_args = 1 if func == "abs" else 2
        return Call(func, tuple(_gen_expr(rng, vars_, depth - 1) for _ in range(n_args)))
    op = rng.choice(_COMPARE_POOL)
    return Binary(op, _gen_expr(rng, vars_, depth - 1), _gen_leaf(rng, vars_))


def _gen_condition(rng: random.Random, vars_: tuple[str, ...], depth: int) -> Expr:
    op = rng.choice(_COMPARE_POOL)
    d = max(depth - 1, 0)
    return Binary(op, _gen_expr(rng, vars_, d), _gen_expr(rng, vars_, d))


def _gen_block(rng: random.Random, vars_: tuple[str, ...], depth: int, n: int, nesting: int) -> tuple[Stmt, ...]:
    stmts: list[Stmt] = []
    for _ in range(n):
        kind = rng.choices(_STMT_KINDS, weights=_STMT_WEIGHTS)[0]
        if nesting <= 0 and kind in ("if", "while"):
            kind = "assign"
        if kind == "assign":
            stmts.append(Assign(rng.choice(vars_), _gen_expr(rng, vars_, depth)))
        elif kind == "return":
            stmts.append(Return(_gen_expr(rng, vars_, depth)))
        elif kind == "if":
            then = _gen_block(rng, vars_, depth, rng.randint(1, 2), nesting - 1)
            orelse = _gen_block(rng, vars_, depth, rng.randint(1, 2), nesting - 1) if rng.random() < 0.5 else None
            stmts.append(If(_gen_condition(rng, vars_, depth), then, orelse))
        else:
            body = _gen_block(rng, vars_, depth, rng.randint(1, 2), nesting - 1)
            stmts.append(While(_gen_condition(rng, vars_, depth), body))
    return tuple(stmts)


def _gen_function(rng: random.Random, depth: int) -> Function:
    name = rng.choice(NAME_POOL)
    n_params = rng.randint(1, 3)
    params = tuple(rng.sample(VAR_POOL, n_params))
    n_stmts = rng.choices(range(1, 9), weights=(3, 6, 5, 3, 2, 1, 1, 1))[0]
    body = _gen_block(rng, params, depth, n_stmts, nesting=2)
    if not any(isinstance(s, Return) for s in body):
        body = body + (Return(_gen_expr(rng, params, 1)),)
    return Function(name, params, body)


def generate(seed: int, count: int, depth: int = 3) -> list[Function]:
    """Generate `count` random valid functions, deterministically per seed.

    Statements draw from assignment (to parameters), if, while, and return;
    duplicates are permitted, deduplication is a separate stage.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = random.Random(seed)
    return [_gen_function(rng, depth) for _ in range(count)]


# ---------------------------------------------------------------------------
# Corpus containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BimodalPair:
    """A (code, summary) training pair; the summary is the pivot rendering."""

    id: str
    code: TokenSeq
    summary: TokenSeq


@dataclass
class MonoCorpus:
    lang: Lang
    items: list[tuple[str, TokenSeq]] = field(default_factory=list)


@dataclass(frozen=True)
class EvalPair:
    id: str
    j: TokenSeq
    p: TokenSeq
    tests: tuple[tuple[tuple[int, ...], int], ...]


@dataclass
class ParallelEvalSet:
    pairs: list[EvalPair]
    n_tests: int
    discarded: int = 0


def make_bimodal(asts: list[Function], lang: Lang) -> list[BimodalPair]:
    """Pair each function's surface rendering with its pivot summary."""
    if lang not in (Lang.J, Lang.P):
        raise ValueError("bimodal code language must be J or P")
    out = []
    for i, fn in enumerate(asts):
        out.append(
            BimodalPair(
                id=f"{lang.value}-{i:05d}",
                code=print_ast(fn, lang),
                summary=print_ast(fn, Lang.PIVOT),
            )
        )
    return out


def make_mono(asts: list[Function], lang: Lang, prefix: str = "") -> MonoCorpus:
    corpus = MonoCorpus(lang=lang)
    for i, fn in enumerate(asts):
        corpus.items.append((f"{prefix}{lang.value}-{i:05d}", print_ast(fn, lang)))
    return corpus


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def dedup(items: list[TokenSeq]) -> list[TokenSeq]:
    """Drop later items whose canonical rendered text hashes equal an earlier
    one (FNV-1a 64-bit); first occurrence wins, order otherwise preserved."""
    seen: set[int] = set()
    out: list[TokenSeq] = []
    for ts in items:
        h = fnv1a_64(render_text(ts))
        if h not in seen:
            seen.add(h)
            out.append(ts)
    return out


def length_filter(items: list[TokenSeq], max_len: int = 256) -> list[TokenSeq]:
    """Keep items with at most max_len tokens."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    return [ts for ts in items if len(ts) <= max_len]


def extract_functions(file_text: str, lang: Lang) -> list[TokenSeq]:
    """Split a source file into its top-level functions, in file order.

    Strict: the whole file must lex and parse as a sequence of functions
    (these files are machine generated, so anything else is corruption).
    """
    if not file_text.strip():
        return []
    ts = lex(file_text, lang)
    opener = "func" if lang is Lang.J else "def"
    starts = [i for i, tok in enumerate(ts.tokens) if tok.text == opener]
    if not starts or starts[0] != 0:
        raise _extract_error(ts, 0, opener)
    out: list[TokenSeq] = []
    bounds = starts + [len(ts.tokens)]
    for lo, hi in zip(bounds, bounds[1:]):
        piece = TokenSeq(lang, ts.tokens[lo:hi])
        parse(piece)  # raises ParseError / UnboundVariable on malformed input
        out.append(piece)
    return out


def _extract_error(ts: TokenSeq, pos: int, expected: str):
    from .minilang import ParseError

    found = ts.tokens[pos].text if pos < len(ts.tokens) else "<eof>"
    return ParseError(pos, expected, found)


def corpus_stats(items) -> tuple[int, int]:
    """(n_functions, n_tokens) over a MonoCorpus or a list of BimodalPair."""
    if isinstance(items, MonoCorpus):
        seqs = [ts for _, ts in items.items]
    else:
        seqs = [pair.code for pair in items]
    return len(seqs), sum(len(ts) for ts in seqs)


# ---------------------------------------------------------------------------
# Evaluation sets
# ---------------------------------------------------------------------------

def make_eval_set(
    asts: list[Function],
    seed: int,
    n_tests: int = 10,
    step_limit: int = 10000,
    max_redraws: int = 20,
) -> ParallelEvalSet:
    """Build parallel (J, P) pairs with unit tests recorded from execution.

    Test arguments are drawn uniformly from [-10, 10]. A program whose J
    member faults or times out on any drawn test gets fresh draws, up to
    max_redraws; still-failing programs are discarded (counted).
    """
    if n_tests < 1:
        raise ValueError("n_tests must be >= 1")
    rng = random.Random(seed)
    pairs: list[EvalPair] = []
    discarded = 0
    for fn in asts:
        # Expected outputs are recorded from the J member; parse(print(., J))
        # is the identity on valid functions, so execute fn directly.
        as_j = parse(print_ast(fn, Lang.J))
        tests: tuple[tuple[tuple[int, ...], int], ...] | None = None
        for _ in range(max_redraws):
            candidate: list[tuple[tuple[int, ...], int]] = []
            ok = True
            for _ in range(n_tests):
                args = tuple(rng.randint(-10, 10) for _ in fn.params)
                outcome = interpret(as_j, list(args), step_limit)
                if not isinstance(outcome, Value):
                    ok = False
                    break
                candidate.append((args, outcome.value))
            if ok:
                tests = tuple(candidate)
                break
        if tests is None:
            discarded += 1
            continue
        pairs.append(
            EvalPair(
                id=f"eval-{len(pairs):05d}",
                j=print_ast(fn, Lang.J),
                p=print_ast(fn, Lang.P),
                tests=tests,
            )
        )
    return ParallelEvalSet(pairs=pairs, n_tests=n_tests, discarded=discarded)


# ---------------------------------------------------------------------------
# JSON Lines I/O
# ---------------------------------------------------------------------------

def _dump_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_mono(corpus: MonoCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for item_id, ts in corpus.items:
            f.write(_dump_line({"id": item_id, "lang": corpus.lang.value, "text": render_text(ts)}) + "\n")


def read_mono(path: str | Path) -> MonoCorpus:
    corpus: MonoCorpus | None = None
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            lang = Lang(obj["lang"])
            if corpus is None:
                corpus = MonoCorpus(lang=lang)
            corpus.items.append((obj["id"], lex(obj["text"], lang)))
    if corpus is None:
        raise ValueError(f"empty corpus file: {path}")
    return corpus


def write_bimodal(pairs: list[BimodalPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pair in pairs:
            f.write(
                _dump_line(
                    {
                        "id": pair.id,
                        "lang": pair.code.lang.value,
                        "code": render_text(pair.code),
                        "summary": render_text(pair.summary),
                    }
                )
                + "\n"
            )


def read_bimodal(path: str | Path) -> list[BimodalPair]:
    out: list[BimodalPair] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            lang = Lang(obj["lang"])
            out.append(
                BimodalPair(
                    id=obj["id"],
                    code=lex(obj["code"], lang),
                    summary=lex(obj["summary"], Lang.PIVOT),
                )
            )
    return out


def write_eval(eval_set: ParallelEvalSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pair in eval_set.pairs:
            f.write(
                _dump_line(
                    {
                        "id": pair.id,
                        "j": render_text(pair.j),
                        "p": render_text(pair.p),
                        "tests": [list(args) + [expected] for args, expected in pair.tests],
                    }
                )
                + "\n"
            )


def read_eval(path: str | Path) -> ParallelEvalSet:
    pairs: list[EvalPair] = []
    n_tests = 0
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            tests = tuple((tuple(row[:-1]), row[-1]) for row in obj["tests"])
            n_tests = max(n_tests, len(tests))
            pairs.append(
                EvalPair(
                    id=obj["id"],
                    j=lex(obj["j"], Lang.J),
                    p=lex(obj["p"], Lang.P),
                    tests=tests,
                )
            )
    return ParallelEvalSet(pairs=pairs, n_tests=n_tests)
