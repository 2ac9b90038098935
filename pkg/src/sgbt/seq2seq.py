"""Target-language-conditioned aligned-token-substitution model.

The model assigns each source token an edit action toward a target language:
replace it (substitution, possibly with itself), delete it, and optionally
insert one token after it. Counts of observed actions are the parameters;
training is count accumulation over minimum-edit-distance alignments, which
is the exact maximum-likelihood estimate for this model class.

Initialization places a constant prior on the identity substitution of every
token, so an untrained model reproduces its input in any target language.
This models the reconstruction bias of denoising-pretrained sequence models:
until training supplies cross-language evidence, the model copies.

Probabilities factor into two independently normalized channels per
(source token, target language):

    replace: observed substitutions, deletion, and the identity prior
    insert:  the five most frequent insert tokens and an explicit no-insert

Each channel is add-epsilon smoothed; an action's probability is the product
of its channel probabilities, so the action space also sums to one.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .minilang import Lang, TokenSeq, tokens_from_texts

# Sentinel context for insertions before the first source token.
BOS = "<s>"

# Op keys as stored in counts and checkpoints.
DEL = "del"
NOINS = "noins"


def sub_key(text: str) -> str:
    return "sub:" + text


def ins_key(text: str) -> str:
    return "ins:" + text


class EmptyBatch(Exception):
    pass


@dataclass
class ModelParams:
    """Edit-op counts per (source token text, target language), plus the copy
    prior weight and smoothing constant. Treated as immutable: training
    returns a new instance."""

    copy_alpha: float
    smoothing: float
    # counts[lang][src_text][op_key] -> accumulated weight
    counts: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)
    # vocab[lang] -> token texts seen on the target side during training
    vocab: dict[str, set[str]] = field(default_factory=dict)

    def copy(self) -> "ModelParams":
        return ModelParams(
            copy_alpha=self.copy_alpha,
            smoothing=self.smoothing,
            counts={
                lang: {src: dict(ops) for src, ops in by_src.items()}
                for lang, by_src in self.counts.items()
            },
            vocab={lang: set(texts) for lang, texts in self.vocab.items()},
        )


def init(copy_alpha: float = 1.0, smoothing: float = 0.1) -> ModelParams:
    """A fresh copy-biased model: every token's identity substitution carries
    weight copy_alpha in every target language (materialized lazily)."""
    if copy_alpha <= 0:
        raise ValueError("copy_alpha must be > 0")
    if smoothing <= 0:
        raise ValueError("smoothing must be > 0")
    return ModelParams(copy_alpha=copy_alpha, smoothing=smoothing)


@dataclass(frozen=True)
class BeamConfig:
    beam_size: int = 1
    n_best: int = 1

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not (1 <= self.n_best <= self.beam_size):
            raise ValueError("n_best must be in [1, beam_size]")


@dataclass(frozen=True)
class TrainPair:
    src: TokenSeq
    tgt: TokenSeq


# ---------------------------------------------------------------------------
# Alignment
# ---------------------------------------------------------------------------

def align(src: TokenSeq | list[str], tgt: TokenSeq | list[str]) -> list[tuple[int, str]]:
    """Monotone minimum-edit alignment as (source_position, op_key) pairs.

    Unit costs, except substitution of equal texts costs 0. Among equal-cost
    paths the earliest position prefers, in order: a substitution of equal
    texts, a deletion, any substitution, an insertion. Deletion before
    unequal substitution keeps the walk re-synchronizing at true matches
    instead of chaining shifted substitutions through deleted regions, which
    is what makes the accumulated counts converge on a consistent per-token
    map. Insertions attach after the preceding source token; position -1
    marks an insertion before the first.
    """
    s = src.texts() if isinstance(src, TokenSeq) else list(src)
    t = tgt.texts() if isinstance(tgt, TokenSeq) else list(tgt)
    if not s or not t:
        raise ValueError("align requires nonempty sequences")

    if s == t:  # hot path: identical sequences need no DP
        return [(i, sub_key(text)) for i, text in enumerate(s)]

    m, n = len(s), len(t)
    # cost[i][j] = min edit cost aligning s[i:] with t[j:]
    cost = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        cost[i][n] = m - i
    for j in range(n + 1):
        cost[m][j] = n - j
    for i in range(m - 1, -1, -1):
        row = cost[i]
        below = cost[i + 1]
        si = s[i]
        for j in range(n - 1, -1, -1):
            sub = below[j + 1] + (0 if si == t[j] else 1)
            dele = below[j] + 1
            ins = row[j + 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            row[j] = best

    ops: list[tuple[int, str]] = []
    i = j = 0
    while i < m or j < n:
        if i < m and j < n:
            here = cost[i][j]
            equal = s[i] == t[j]
            sub_cost = cost[i + 1][j + 1] + (0 if equal else 1)
            if equal and sub_cost == here:
                ops.append((i, sub_key(t[j])))
                i += 1
                j += 1
                continue
            if cost[i + 1][j] + 1 == here:
                ops.append((i, DEL))
                i += 1
                continue
            if sub_cost == here:
                ops.append((i, sub_key(t[j])))
                i += 1
                j += 1
                continue
            ops.append((i - 1, ins_key(t[j])))
            j += 1
        elif i < m:
            ops.append((i, DEL))
            i += 1
        else:
            ops.append((i - 1, ins_key(t[j])))
            j += 1
    return ops


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_update(theta: ModelParams, batch: list[TrainPair], weight: float = 1.0) -> ModelParams:
    """Accumulate alignment op counts from the batch; returns a new model.

    Every aligned source position also records whether an insertion followed
    it, so the insert channel learns an explicit no-insert rate.
    """
    if not batch:
        raise EmptyBatch("batch must contain at least one pair")
    if weight <= 0:
        raise ValueError("weight must be > 0")
    new = theta.copy()
    for pair in batch:
        if len(pair.src) == 0 or len(pair.tgt) == 0:
            raise ValueError("training pair sides must be nonempty")
        lang = pair.tgt.lang.value
        by_src = new.counts.setdefault(lang, {})
        vocab = new.vocab.setdefault(lang, set())
        vocab.update(pair.tgt.texts())
        src_texts = pair.src.texts()
        ops = align(pair.src, pair.tgt)
        inserted_at: set[int] = set()
        for pos, op in ops:
            text = BOS if pos < 0 else src_texts[pos]
            slot = by_src.setdefault(text, {})
            slot[op] = slot.get(op, 0.0) + weight
            if op.startswith("ins:"):
                inserted_at.add(pos)
        for pos in range(-1, len(src_texts)):
            if pos not in inserted_at:
                text = BOS if pos < 0 else src_texts[pos]
                slot = by_src.setdefault(text, {})
                slot[NOINS] = slot.get(NOINS, 0.0) + weight
    return new


# ---------------------------------------------------------------------------
# Probabilities
# ---------------------------------------------------------------------------

def replace_channel(theta: ModelParams, src_text: str, target: Lang) -> dict[str, float]:
    """Normalized replace-op probabilities: substitutions, deletion, and the
    identity prior. Sums to 1 within smoothing tolerance."""
    stored = theta.counts.get(target.value, {}).get(src_text, {})
    ops: dict[str, float] = {sub_key(src_text): theta.copy_alpha, DEL: 0.0}
    for op, c in stored.items():
        if op.startswith("sub:") or op == DEL:
            ops[op] = ops.get(op, 0.0) + c
    eps = theta.smoothing
    total = sum(ops.values()) + eps * len(ops)
    return {op: (c + eps) / total for op, c in ops.items()}


def insert_channel(theta: ModelParams, src_text: str, target: Lang, limit: int = 5) -> dict[str, float]:
    """Normalized insert-op probabilities over the `limit` most frequent
    insert tokens for this context plus the explicit no-insert event."""
    stored = theta.counts.get(target.value, {}).get(src_text, {})
    ins_ops = sorted(
        ((op, c) for op, c in stored.items() if op.startswith("ins:")),
        key=lambda kv: (-kv[1], kv[0]),
    )[:limit]
    ops: dict[str, float] = {NOINS: stored.get(NOINS, 0.0)}
    ops.update(ins_ops)
    eps = theta.smoothing
    total = sum(ops.values()) + eps * len(ops)
    return {op: (c + eps) / total for op, c in ops.items()}


def _argmax(channel: dict[str, float]) -> tuple[str, float]:
    # Deterministic: highest probability, ties to the lexicographically
    # smallest op key (op kind first, then token text).
    best_op = min(channel, key=lambda op: (-channel[op], op))
    return best_op, channel[best_op]


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def generate(
    theta: ModelParams,
    src: TokenSeq,
    target: Lang,
    cfg: BeamConfig = BeamConfig(),
) -> list[tuple[TokenSeq, float]]:
    """Beam decode: per source position choose a replace op and at most one
    insert. Returns up to n_best (sequence, log-probability), best first;
    score ties are broken by lexicographic token order. Beam size 1 is greedy.
    """
    if len(src) == 0:
        return [(TokenSeq(target, ()), 0.0)]
    if cfg.beam_size == 1:
        return [_greedy(theta, src, target)]

    # Hypotheses advance in lockstep over source positions.
    beams: list[tuple[float, tuple[str, ...]]] = []
    for op, p in insert_channel(theta, BOS, target).items():
        emitted = (op[4:],) if op.startswith("ins:") else ()
        beams.append((math.log(p), emitted))
    beams = _prune(beams, cfg.beam_size)

    for text in src.texts():
        rep = replace_channel(theta, text, target)
        ins = insert_channel(theta, text, target)
        extensions: list[tuple[float, tuple[str, ...]]] = []
        for score, emitted in beams:
            for rop, rp in rep.items():
                base = emitted if rop == DEL else emitted + (rop[4:],)
                rscore = score + math.log(rp)
                for iop, ip in ins.items():
                    out = base if iop == NOINS else base + (iop[4:],)
                    extensions.append((rscore + math.log(ip), out))
        beams = _prune(extensions, cfg.beam_size)

    results = [
        (tokens_from_texts(list(texts), target), score)
        for score, texts in _prune(beams, cfg.n_best)
    ]
    return results


def _prune(hyps: list[tuple[float, tuple[str, ...]]], k: int) -> list[tuple[float, tuple[str, ...]]]:
    hyps.sort(key=lambda h: (-h[0], h[1]))
    return hyps[:k]


def _greedy(theta: ModelParams, src: TokenSeq, target: Lang) -> tuple[TokenSeq, float]:
    out: list[str] = []
    score = 0.0
    op, p = _argmax(insert_channel(theta, BOS, target))
    score += math.log(p)
    if op.startswith("ins:"):
        out.append(op[4:])
    for text in src.texts():
        rop, rp = _argmax(replace_channel(theta, text, target))
        score += math.log(rp)
        if rop != DEL:
            out.append(rop[4:])
        iop, ip = _argmax(insert_channel(theta, text, target))
        score += math.log(ip)
        if iop.startswith("ins:"):
            out.append(iop[4:])
    return tokens_from_texts(out, target), score


def summarize_generate(
    s_model: ModelParams,
    g_model: ModelParams,
    x: TokenSeq,
    target: Lang,
    dropout: float = 0.0,
    seed: int = 0,
) -> TokenSeq | None:
    """Two-step generation: greedy summary into the pivot, token dropout on
    the summary, then greedy generation into the target language. Returns
    None when dropout empties the summary (callers skip the pair)."""
    pivot, _ = generate(s_model, x, Lang.PIVOT)[0]
    if dropout > 0.0:
        rng = random.Random(seed)
        kept = [t for t in pivot.tokens if rng.random() >= dropout]
        pivot = TokenSeq(Lang.PIVOT, tuple(kept))
    if len(pivot) == 0:
        return None
    out, _ = generate(g_model, pivot, target)[0]
    return out


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def save_model(theta: ModelParams, path: str | Path) -> None:
    """Sorted-key JSON text checkpoint; round-trips bit exactly."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "copy_alpha": theta.copy_alpha,
        "smoothing": theta.smoothing,
        "counts": theta.counts,
        "vocab": {lang: sorted(texts) for lang, texts in theta.vocab.items()},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")


def load_model(path: str | Path) -> ModelParams:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version: {payload.get('version')!r}")
    return ModelParams(
        copy_alpha=payload["copy_alpha"],
        smoothing=payload["smoothing"],
        counts=payload["counts"],
        vocab={lang: set(texts) for lang, texts in payload["vocab"].items()},
    )


# ---------------------------------------------------------------------------
# Hypothesis file I/O (used by the translate and evaluate commands)
# ---------------------------------------------------------------------------

def write_hyps(rows: list[tuple[str, list[tuple[TokenSeq, float]]]], path: str | Path) -> None:
    """JSONL: {"id", "hyps": [{"text", "logprob"}...]}. Hypothesis text is the
    space-joined token texts (lossless for token-level evaluation)."""
    with open(path, "w", encoding="utf-8") as f:
        for item_id, hyps in rows:
            obj = {
                "id": item_id,
                "hyps": [
                    {"text": " ".join(ts.texts()), "logprob": lp} for ts, lp in hyps
                ],
            }
            f.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def read_hyps(path: str | Path, lang: Lang) -> list[tuple[str, list[tuple[TokenSeq, float]]]]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            hyps = [
                (tokens_from_texts(h["text"].split(), lang), h["logprob"])
                for h in obj["hyps"]
            ]
            out.append((obj["id"], hyps))
    return out
