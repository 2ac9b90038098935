"""Evaluation stack: BLEU, exact match, CodeBLEU, and computational accuracy
with the execution-outcome taxonomy (error / failure / success / timeout).

BLEU is token-level BLEU-4: modified n-gram precisions with add-epsilon
smoothing for zero match counts (orders longer than the hypothesis are
skipped), a closest-reference brevity penalty, and a corpus variant that
aggregates counts before the geometric mean.

CodeBLEU combines four components: plain n-gram match, keyword-weighted
n-gram match, AST subtree match (depth-limited shapes with identifiers and
literals abstracted), and dataflow edge match. A hypothesis that fails to
parse scores zero on the structural components; references must parse.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .corpus import EvalPair, ParallelEvalSet
from .minilang import (
    Assign,
    Binary,
    Call,
    Fault,
    Function,
    If,
    IntLit,
    J_KEYWORDS,
    Lang,
    Let,
    P_KEYWORDS,
    ParseError,
    Return,
    Timeout,
    TokenSeq,
    UnboundVariable,
    Value,
    Var,
    While,
    ArityMismatch,
    dataflow_edges,
    interpret,
    parse,
)
from .seq2seq import BeamConfig, ModelParams, generate

BLEU_EPS = 1e-9
MAX_ORDER = 4
KEYWORD_WEIGHT = 4.0


class EmptyInput(Exception):
    pass


class UnparsableReference(Exception):
    pass


class BeamTooSmall(Exception):
    pass


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def _ngrams(texts: list[str], n: int) -> Counter:
    return Counter(tuple(texts[i : i + n]) for i in range(len(texts) - n + 1))


def _closest_ref_len(hyp_len: int, ref_lens: list[int]) -> int:
    # Closest length wins; ties prefer the shorter reference.
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def _match_stats(hyp: list[str], refs: list[list[str]]) -> tuple[list[int], list[int]]:
    """Clipped match and total counts per n-gram order."""
    matched = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngrams(hyp, n)
        if not hyp_counts:
            continue
        max_ref: Counter = Counter()
        for ref in refs:
            for gram, c in _ngrams(ref, n).items():
                if c > max_ref[gram]:
                    max_ref[gram] = c
        totals[n - 1] = sum(hyp_counts.values())
        matched[n - 1] = sum(min(c, max_ref[gram]) for gram, c in hyp_counts.items())
    return matched, totals


def _combine(matched: list[int], totals: list[int], hyp_len: int, ref_len: int) -> float:
    log_sum = 0.0
    orders = 0
    for m, t in zip(matched, totals):
        if t == 0:
            continue
        p = m / t if m > 0 else BLEU_EPS / t
        log_sum += math.log(p)
        orders += 1
    if orders == 0:
        return 0.0
    bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    return bp * math.exp(log_sum / orders)


def bleu(hyp: TokenSeq, refs: list[TokenSeq]) -> float:
    """Sentence BLEU-4 of a hypothesis against one or more references."""
    if len(hyp) == 0 or not refs or any(len(r) == 0 for r in refs):
        raise EmptyInput("hypothesis and references must be nonempty")
    hyp_texts = hyp.texts()
    ref_texts = [r.texts() for r in refs]
    matched, totals = _match_stats(hyp_texts, ref_texts)
    ref_len = _closest_ref_len(len(hyp_texts), [len(r) for r in ref_texts])
    return _combine(matched, totals, len(hyp_texts), ref_len)


def corpus_bleu(hyps: list[TokenSeq], refs_per_hyp: list[list[TokenSeq]]) -> float:
    """Corpus BLEU-4: counts are pooled over items before combining."""
    if not hyps or len(hyps) != len(refs_per_hyp):
        raise EmptyInput("need one reference list per hypothesis")
    matched = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hyps, refs_per_hyp):
        if len(hyp) == 0 or not refs:
            raise EmptyInput("hypothesis and references must be nonempty")
        hyp_texts = hyp.texts()
        ref_texts = [r.texts() for r in refs]
        m, t = _match_stats(hyp_texts, ref_texts)
        for i in range(MAX_ORDER):
            matched[i] += m[i]
            totals[i] += t[i]
        hyp_len += len(hyp_texts)
        ref_len += _closest_ref_len(len(hyp_texts), [len(r) for r in ref_texts])
    return _combine(matched, totals, hyp_len, ref_len)


def exact_match(hyp: TokenSeq, refs: list[TokenSeq]) -> int:
    """1 iff the hypothesis token texts equal some reference exactly."""
    hyp_texts = hyp.texts()
    return int(any(hyp_texts == r.texts() for r in refs))


# ---------------------------------------------------------------------------
# CodeBLEU
# ---------------------------------------------------------------------------

def _keywords_for(lang: Lang) -> frozenset[str]:
    return J_KEYWORDS if lang is Lang.J else P_KEYWORDS


def _weighted_bleu(hyp: list[str], ref: list[str], keywords: frozenset[str]) -> float:
    """BLEU with per-token weights (keywords count KEYWORD_WEIGHT) applied to
    both matched and total counts; an n-gram weighs the mean of its tokens."""

    def gram_weight(gram: tuple[str, ...]) -> float:
        return sum(KEYWORD_WEIGHT if t in keywords else 1.0 for t in gram) / len(gram)

    log_sum = 0.0
    orders = 0
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngrams(hyp, n)
        if not hyp_counts:
            continue
        ref_counts = _ngrams(ref, n)
        total = sum(c * gram_weight(g) for g, c in hyp_counts.items())
        matched = sum(
            min(c, ref_counts[g]) * gram_weight(g) for g, c in hyp_counts.items() if g in ref_counts
        )
        p = matched / total if matched > 0 else BLEU_EPS / total
        log_sum += math.log(p)
        orders += 1
    if orders == 0:
        return 0.0
    bp = math.exp(min(0.0, 1.0 - len(ref) / len(hyp)))
    return bp * math.exp(log_sum / orders)


_SUBTREE_DEPTH = 3


def _label(node) -> str:
    if isinstance(node, Function):
        return "fn"
    if isinstance(node, Let):
        return "let"
    if isinstance(node, Assign):
        return "assign"
    if isinstance(node, Return):
        return "return"
    if isinstance(node, If):
        return "if-else" if node.orelse is not None else "if"
    if isinstance(node, While):
        return "while"
    if isinstance(node, Binary):
        return "bin:" + node.op
    if isinstance(node, Call):
        return "call:" + node.func
    if isinstance(node, Var):
        return "ID"
    return "LIT"


def _children(node) -> list:
    if isinstance(node, Function):
        return [Var(p) for p in node.params] + list(node.body)
    if isinstance(node, (Let, Assign)):
        return [Var(node.var), node.value]
    if isinstance(node, Return):
        return [node.value]
    if isinstance(node, If):
        kids = [node.cond] + list(node.then)
        if node.orelse is not None:
            kids += list(node.orelse)
        return kids
    if isinstance(node, While):
        return [node.cond] + list(node.body)
    if isinstance(node, Binary):
        return [node.left, node.right]
    if isinstance(node, Call):
        return list(node.args)
    return []


def _shape(node, depth: int) -> str:
    if depth == 0:
        return "_"
    kids = _children(node)
    if not kids:
        return _label(node)
    return "(" + _label(node) + " " + " ".join(_shape(k, depth - 1) for k in kids) + ")"


def _subtree_multiset(fn: Function) -> Counter:
    """One depth-limited shape per AST node, identifiers and literals
    abstracted to ID / LIT."""
    shapes: Counter = Counter()
    stack = [fn]
    while stack:
        node = stack.pop()
        shapes[_shape(node, _SUBTREE_DEPTH)] += 1
        stack.extend(_children(node))
    return shapes


def _try_parse(ts: TokenSeq) -> Function | None:
    try:
        return parse(ts)
    except (ParseError, UnboundVariable, ValueError):
        return None


def codebleu(
    hyp: TokenSeq,
    ref: TokenSeq,
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> tuple[float, dict[str, float]]:
    """Weighted sum of n-gram, keyword-weighted n-gram, AST subtree, and
    dataflow components. Returns (score, components)."""
    if len(weights) != 4 or any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("weights must be 4 nonnegative values summing to 1")
    ref_fn = _try_parse(ref)
    if ref_fn is None:
        raise UnparsableReference("reference must parse")
    c1 = bleu(hyp, [ref])
    c2 = _weighted_bleu(hyp.texts(), ref.texts(), _keywords_for(ref.lang))
    hyp_fn = _try_parse(hyp)
    if hyp_fn is None:
        c3 = 0.0
        c4 = 0.0
    else:
        hyp_shapes = _subtree_multiset(hyp_fn)
        ref_shapes = _subtree_multiset(ref_fn)
        overlap = sum((hyp_shapes & ref_shapes).values())
        c3 = overlap / sum(hyp_shapes.values())
        hyp_edges = dataflow_edges(hyp_fn)
        ref_edges = dataflow_edges(ref_fn)
        c4 = len(hyp_edges & ref_edges) / max(1, len(ref_edges))
    components = {"ngram": c1, "weighted_ngram": c2, "syntax": c3, "dataflow": c4}
    score = sum(w * c for w, c in zip(weights, components.values()))
    return score, components


# ---------------------------------------------------------------------------
# Computational accuracy
# ---------------------------------------------------------------------------

OUTCOME_ERROR = "error"
OUTCOME_FAILURE = "failure"
OUTCOME_SUCCESS = "success"
OUTCOME_TIMEOUT = "timeout"


def _classify(hyp: TokenSeq, tests, step_limit: int) -> str:
    """Outcome of one hypothesis on a test list: the first fault or timeout
    (in test order) decides; otherwise failure iff any output mismatches."""
    fn = _try_parse(hyp)
    if fn is None:
        return OUTCOME_ERROR
    mismatch = False
    for args, expected in tests:
        try:
            outcome = interpret(fn, list(args), step_limit)
        except ArityMismatch:
            return OUTCOME_ERROR
        if isinstance(outcome, Fault):
            return OUTCOME_ERROR
        if isinstance(outcome, Timeout):
            return OUTCOME_TIMEOUT
        if outcome.value != expected:
            mismatch = True
    return OUTCOME_FAILURE if mismatch else OUTCOME_SUCCESS


def computational_accuracy(
    hyps_per_item: list[list[tuple[TokenSeq, float]]],
    eval_set: ParallelEvalSet,
    direction: str,
    step_limit: int = 10000,
    configs: tuple[tuple[int, int], ...] = ((1, 1),),
) -> tuple[dict[tuple[int, int], float], dict[str, int]]:
    """CA over (top_m, beam_B) configurations plus the top-1 outcome counts.

    Each item supplies one n-best list sorted by log-probability; an item is
    correct under (m, B) when any of the top m of the first B hypotheses
    passes every unit test. Candidate sets nest, so CA is monotone in both
    m and B. exact_match_within_success compares against the direction's
    reference member.
    """
    if len(hyps_per_item) != len(eval_set.pairs):
        raise ValueError("one n-best list per eval item required")
    max_b = max(b for _, b in configs)
    for hyps in hyps_per_item:
        if len(hyps) < max_b:
            raise BeamTooSmall(f"need {max_b} hypotheses, got {len(hyps)}")

    counts: dict[str, int] = {
        OUTCOME_ERROR: 0,
        OUTCOME_FAILURE: 0,
        OUTCOME_SUCCESS: 0,
        OUTCOME_TIMEOUT: 0,
        "exact_match_within_success": 0,
    }
    correct: dict[tuple[int, int], int] = {c: 0 for c in configs}
    for pair, hyps in zip(eval_set.pairs, hyps_per_item):
        ref = pair.p if direction == "j2p" else pair.j
        verdicts = [_classify(ts, pair.tests, step_limit) for ts, _ in hyps[:max_b]]
        top = verdicts[0]
        counts[top] += 1
        if top == OUTCOME_SUCCESS and hyps[0][0].texts() == ref.texts():
            counts["exact_match_within_success"] += 1
        for m, b in configs:
            window = verdicts[: min(m, b)]
            if OUTCOME_SUCCESS in window:
                correct[(m, b)] += 1
    total = len(eval_set.pairs)
    ca = {c: correct[c] / total for c in configs}
    return ca, counts


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalConfig:
    directions: tuple[str, ...] = ("j2p", "p2j")
    beam_configs: tuple[tuple[int, int], ...] = ((1, 1), (1, 10), (5, 5), (10, 10))
    step_limit: int = 10000
    codebleu_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)


@dataclass
class DirectionReport:
    bleu: float
    em: float
    codebleu: float
    codebleu_components: dict[str, float]
    ca: dict[tuple[int, int], float]
    outcome_counts: dict[str, int]


@dataclass
class MetricReport:
    directions: dict[str, DirectionReport] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {}
        for direction, rep in sorted(self.directions.items()):
            out[direction] = {
                "bleu": round(rep.bleu, 6),
                "em": round(rep.em, 6),
                "codebleu": round(rep.codebleu, 6),
                "codebleu_components": {
                    k: round(v, 6) for k, v in sorted(rep.codebleu_components.items())
                },
                "ca": {f"{m}:{b}": round(v, 6) for (m, b), v in sorted(rep.ca.items())},
                "outcomes": dict(sorted(rep.outcome_counts.items())),
            }
        return out


def evaluate_direction(
    hyps_per_item: list[list[tuple[TokenSeq, float]]],
    eval_set: ParallelEvalSet,
    direction: str,
    cfg: EvalConfig = EvalConfig(),
) -> DirectionReport:
    """Metrics for pre-generated n-best lists in one direction."""
    refs = [pair.p if direction == "j2p" else pair.j for pair in eval_set.pairs]
    top1 = [hyps[0][0] for hyps in hyps_per_item]
    bleu_score = corpus_bleu(top1, [[r] for r in refs])
    em = sum(exact_match(h, [r]) for h, r in zip(top1, refs)) / len(refs)
    cb_scores = []
    cb_components: dict[str, float] = {"ngram": 0.0, "weighted_ngram": 0.0, "syntax": 0.0, "dataflow": 0.0}
    for h, r in zip(top1, refs):
        score, comps = codebleu(h, r, cfg.codebleu_weights)
        cb_scores.append(score)
        for k, v in comps.items():
            cb_components[k] += v
    n = len(refs)
    cb_components = {k: v / n for k, v in cb_components.items()}
    ca, outcomes = computational_accuracy(
        hyps_per_item, eval_set, direction, cfg.step_limit, cfg.beam_configs
    )
    return DirectionReport(
        bleu=bleu_score,
        em=em,
        codebleu=sum(cb_scores) / n,
        codebleu_components=cb_components,
        ca=ca,
        outcome_counts=outcomes,
    )


def evaluate_all(
    theta_f: ModelParams,
    theta_b: ModelParams,
    eval_set: ParallelEvalSet,
    cfg: EvalConfig = EvalConfig(),
) -> MetricReport:
    """Decode the eval set with both models and compute every metric in the
    requested directions. Deterministic."""
    if not eval_set.pairs:
        raise EmptyInput("eval set is empty")
    max_b = max(b for _, b in cfg.beam_configs)
    beam = BeamConfig(beam_size=max_b, n_best=max_b)
    report = MetricReport()
    for direction in cfg.directions:
        if direction == "j2p":
            hyps = [generate(theta_f, pair.j, Lang.P, beam) for pair in eval_set.pairs]
        else:
            hyps = [generate(theta_b, pair.p, Lang.J, beam) for pair in eval_set.pairs]
        report.directions[direction] = evaluate_direction(hyps, eval_set, direction, cfg)
    return report
