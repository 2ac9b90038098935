"""Back-translation training with a summarize-and-generate bootstrap.

First the summarizer S (code to pivot) and generator G (pivot to code) are
trained supervised on bimodal pairs, pooled across both surface languages.
Back-translation then alternates: each step samples half a batch from each
monolingual pool, produces pseudo-sources for the sampled programs, and
updates the forward model f (J to P) and backward model b (P to J) on the
(pseudo-source, true program) pairs.

For the first m steps the pseudo-sources come from the two-step pivot route
G(S(y)); afterwards from the current translation models themselves. With
m = 0 and copy-initialized models the pseudo-sources are verbatim copies, so
training only ever reinforces identity substitutions and the models never
leave the copy regime: cross-language exact match and computational accuracy
stay at zero. The pivot bootstrap is what breaks that fixpoint.

Checkpoints are selected by mean dev BLEU over both directions. Pseudo-pair
generation within a step only reads model state and could run in parallel;
count updates are applied serially at step end, and no step begins before
the previous update completes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import metrics
from .corpus import BimodalPair, MonoCorpus, derive_seed
from .minilang import Lang, TokenSeq
from .seq2seq import (
    BeamConfig,
    ModelParams,
    TrainPair,
    generate,
    init,
    summarize_generate,
    train_update,
)


class EmptyCorpus(Exception):
    pass


class ExhaustedCorpus(Exception):
    pass


@dataclass(frozen=True)
class BTConfig:
    """Loop parameters. The reference configuration uses m = 200 pivot-route
    steps out of 10,000 total; the desk-scale default runs 2,000."""

    m: int = 200
    steps: int = 2000
    batch_size: int = 32
    dropout: float = 0.1
    eval_interval: int = 100
    seed: int = 0
    warm_start: str = "online"  # "online" | "offline"
    copy_alpha: float = 1.0
    smoothing: float = 0.1

    def __post_init__(self):
        if not (0 <= self.m <= self.steps):
            raise ValueError("require 0 <= m <= steps")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0.0 <= self.dropout <= 1.0):
            raise ValueError("dropout must be a probability")
        if self.warm_start not in ("online", "offline"):
            raise ValueError("warm_start must be 'online' or 'offline'")


@dataclass
class TrainState:
    step: int
    theta_f: ModelParams
    theta_b: ModelParams
    best_step: int = 0
    best_f: ModelParams | None = None
    best_b: ModelParams | None = None
    best_dev_bleu: float = -1.0
    log: list[dict] = field(default_factory=list)


def train_sg(
    bimodal_j: list[BimodalPair],
    bimodal_p: list[BimodalPair],
    copy_alpha: float = 1.0,
    smoothing: float = 0.1,
) -> tuple[ModelParams, ModelParams]:
    """Supervised training of the summarizer and generator on pooled pairs.

    S learns code to summary from both languages jointly; G learns summary to
    code, conditioned on the code's language tag.
    """
    if not bimodal_j or not bimodal_p:
        raise EmptyCorpus("both bimodal corpora must be nonempty")
    pooled = list(bimodal_j) + list(bimodal_p)
    s_model = train_update(
        init(copy_alpha, smoothing),
        [TrainPair(pair.code, pair.summary) for pair in pooled],
    )
    g_model = train_update(
        init(copy_alpha, smoothing),
        [TrainPair(pair.summary, pair.code) for pair in pooled],
    )
    return s_model, g_model


def _sample(pool: MonoCorpus, rng: random.Random, k: int) -> list[TokenSeq]:
    if not pool.items:
        raise ExhaustedCorpus(f"pool for {pool.lang} is empty")
    return [pool.items[rng.randrange(len(pool.items))][1] for _ in range(k)]


def bt_step(
    state: TrainState,
    d_src: MonoCorpus,
    d_tgt: MonoCorpus,
    s_model: ModelParams | None,
    g_model: ModelParams | None,
    cfg: BTConfig,
    batch_rng: random.Random,
    dropout_rng: random.Random,
) -> TrainState:
    """One training step; steps are 1-indexed, the pivot route runs while
    step <= m. Returns a new state; pairs with empty pseudo-sources are
    skipped."""
    if state.step >= cfg.steps:
        raise ValueError(f"step {state.step} already at configured total {cfg.steps}")
    k = state.step + 1
    half = max(cfg.batch_size // 2, 1)
    ys = _sample(d_src, batch_rng, half)  # true source-language programs
    yt = _sample(d_tgt, batch_rng, half)  # true target-language programs

    use_pivot_route = k <= cfg.m
    if use_pivot_route:
        if s_model is None or g_model is None:
            raise ValueError("pivot-route steps require trained S and G models")
        x_for_f = [
            summarize_generate(s_model, g_model, y, d_src.lang, cfg.dropout, dropout_rng.randrange(1 << 30))
            for y in yt
        ]
        x_for_b = [
            summarize_generate(s_model, g_model, y, d_tgt.lang, cfg.dropout, dropout_rng.randrange(1 << 30))
            for y in ys
        ]
    else:
        x_for_f = [generate(state.theta_b, y, d_src.lang)[0][0] for y in yt]
        x_for_b = [generate(state.theta_f, y, d_tgt.lang)[0][0] for y in ys]

    f_batch = [TrainPair(x, y) for x, y in zip(x_for_f, yt) if x is not None and len(x) > 0]
    b_batch = [TrainPair(x, y) for x, y in zip(x_for_b, ys) if x is not None and len(x) > 0]
    theta_f = train_update(state.theta_f, f_batch) if f_batch else state.theta_f
    theta_b = train_update(state.theta_b, b_batch) if b_batch else state.theta_b

    entry = {
        "step": k,
        "provenance": "sg" if use_pivot_route else "bt",
        "f_pairs": len(f_batch),
        "b_pairs": len(b_batch),
    }
    return replace_state(state, step=k, theta_f=theta_f, theta_b=theta_b, entry=entry)


def replace_state(state: TrainState, step: int, theta_f, theta_b, entry: dict) -> TrainState:
    new = TrainState(
        step=step,
        theta_f=theta_f,
        theta_b=theta_b,
        best_step=state.best_step,
        best_f=state.best_f,
        best_b=state.best_b,
        best_dev_bleu=state.best_dev_bleu,
        log=state.log + [entry],
    )
    return new


def dev_bleu(theta_f: ModelParams, theta_b: ModelParams, dev) -> float:
    """Mean corpus BLEU of greedy decoding over both directions."""
    hyps_p = [generate(theta_f, pair.j, Lang.P)[0][0] for pair in dev.pairs]
    hyps_j = [generate(theta_b, pair.p, Lang.J)[0][0] for pair in dev.pairs]
    fwd = metrics.corpus_bleu(hyps_p, [[pair.p] for pair in dev.pairs])
    bwd = metrics.corpus_bleu(hyps_j, [[pair.j] for pair in dev.pairs])
    return (fwd + bwd) / 2.0


def _warm_start_offline(
    theta_f: ModelParams,
    theta_b: ModelParams,
    d_src: MonoCorpus,
    d_tgt: MonoCorpus,
    s_model: ModelParams,
    g_model: ModelParams,
    cfg: BTConfig,
    dropout_rng: random.Random,
) -> tuple[ModelParams, ModelParams]:
    """Pre-generate pivot-route pairs over the full pools and apply a single
    update to each direction before the loop starts."""
    f_batch = []
    for _, y in d_tgt.items:
        x = summarize_generate(s_model, g_model, y, d_src.lang, cfg.dropout, dropout_rng.randrange(1 << 30))
        if x is not None and len(x) > 0:
            f_batch.append(TrainPair(x, y))
    b_batch = []
    for _, y in d_src.items:
        x = summarize_generate(s_model, g_model, y, d_tgt.lang, cfg.dropout, dropout_rng.randrange(1 << 30))
        if x is not None and len(x) > 0:
            b_batch.append(TrainPair(x, y))
    if f_batch:
        theta_f = train_update(theta_f, f_batch)
    if b_batch:
        theta_b = train_update(theta_b, b_batch)
    return theta_f, theta_b


def run(
    cfg: BTConfig,
    d_src: MonoCorpus,
    d_tgt: MonoCorpus,
    dev,
    s_model: ModelParams | None = None,
    g_model: ModelParams | None = None,
    bimodal_j: list[BimodalPair] | None = None,
    bimodal_p: list[BimodalPair] | None = None,
) -> TrainState:
    """Full training run from copy-initialized translation models.

    S and G may be passed pre-trained or trained here from bimodal corpora;
    with m = 0 and the online schedule they are not needed at all. Dev BLEU
    is evaluated at step 0, every eval_interval steps, and at the final step;
    the best checkpoint is kept. Deterministic per cfg.seed.
    """
    need_sg = cfg.m > 0 or cfg.warm_start == "offline"
    if need_sg and s_model is None:
        if bimodal_j is None or bimodal_p is None:
            raise EmptyCorpus("bimodal corpora required to train S and G")
        s_model, g_model = train_sg(bimodal_j, bimodal_p, cfg.copy_alpha, cfg.smoothing)

    batch_rng = random.Random(derive_seed(cfg.seed, "batching"))
    dropout_rng = random.Random(derive_seed(cfg.seed, "dropout"))

    theta_f = init(cfg.copy_alpha, cfg.smoothing)
    theta_b = init(cfg.copy_alpha, cfg.smoothing)
    if cfg.warm_start == "offline":
        theta_f, theta_b = _warm_start_offline(
            theta_f, theta_b, d_src, d_tgt, s_model, g_model, cfg, dropout_rng
        )

    state = TrainState(step=0, theta_f=theta_f, theta_b=theta_b)
    effective_m = 0 if cfg.warm_start == "offline" else cfg.m

    def evaluate(st: TrainState) -> TrainState:
        score = dev_bleu(st.theta_f, st.theta_b, dev)
        entry = {"step": st.step, "provenance": "eval", "dev_bleu": score}
        st = replace_state(st, st.step, st.theta_f, st.theta_b, entry)
        if score > st.best_dev_bleu:
            st.best_dev_bleu = score
            st.best_step = st.step
            st.best_f = st.theta_f
            st.best_b = st.theta_b
        return st

    state = evaluate(state)
    loop_cfg = cfg if effective_m == cfg.m else replace(cfg, m=effective_m)
    while state.step < cfg.steps:
        state = bt_step(state, d_src, d_tgt, s_model, g_model, loop_cfg, batch_rng, dropout_rng)
        if state.step % cfg.eval_interval == 0 or state.step == cfg.steps:
            state = evaluate(state)
    return state
