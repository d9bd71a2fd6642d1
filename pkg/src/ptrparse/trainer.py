"""Teacher-forced training: Adam with linear warmup/decay and global-norm clipping."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .oracle import OracleSequence, replay
from .scorer import PointerScorer

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 30
    max_tokens_per_batch: int = 3000
    peak_lr: float = 1e-3
    warmup_fraction: float = 0.1
    grad_clip: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.9
    eps: float = 1e-8
    eval_every: int = 0
    seed: int = 0

    def validate(self):
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        if self.grad_clip <= 0:
            raise ValueError("grad_clip must be > 0")
        if self.peak_lr < 0:
            raise ValueError("peak_lr must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


class LinearWarmupDecay:
    """Rises linearly to ``peak`` at step ``warmup_steps`` then falls linearly
    to exactly 0 at ``total_steps`` (steps are 1-based)."""

    def __init__(self, peak: float, total_steps: int, warmup_fraction: float):
        self.peak = peak
        self.total = max(1, total_steps)
        self.warmup = min(self.total, max(1, round(warmup_fraction * self.total)))

    def __call__(self, step: int) -> float:
        if step <= self.warmup:
            return self.peak * step / self.warmup
        return self.peak * (self.total - step) / (self.total - self.warmup)


class Adam:
    def __init__(self, params: dict[str, np.ndarray], beta1=0.9, beta2=0.9, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            if lr:
                params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def global_norm(grads) -> float:
    return math.sqrt(sum(float(np.vdot(g, g)) for g in grads.values()))


def clip_gradients(grads, max_norm: float) -> float:
    """Scale ``grads`` in place so their global norm is at most ``max_norm``.
    Returns the norm before clipping."""
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def make_batches(corpus, cfg: TrainConfig, rng: np.random.Generator | None = None) -> list[list[int]]:
    """Group sentence indices of similar length under the token cap.

    Sentences are sorted by length and packed greedily; the batch order is
    shuffled with ``rng`` when given.
    """
    if not corpus:
        raise ValueError("empty corpus")
    cap = cfg.max_tokens_per_batch
    lengths = [len(tokens) for tokens, _ in corpus]
    for i, n in enumerate(lengths):
        if n > cap:
            raise ValueError(f"sentence {i} has {n} tokens, more than max_tokens_per_batch={cap}")
    order = sorted(range(len(corpus)), key=lambda i: (lengths[i], i))
    batches, cur, used = [], [], 0
    for i in order:
        if used + lengths[i] > cap and cur:
            batches.append(cur)
            cur, used = [], 0
        cur.append(i)
        used += lengths[i]
    if cur:
        batches.append(cur)
    if rng is not None:
        perm = rng.permutation(len(batches))
        batches = [batches[j] for j in perm]
    return batches


def action_accuracy(model: PointerScorer, corpus) -> float:
    """Teacher-forced accuracy: a step counts when both the best legal
    boundary and the best label match the oracle."""
    correct = total = 0
    for tokens, oracle in corpus:
        out = model.forward(tokens, oracle, backward=False)
        correct += int(np.sum(out["point_correct"] & out["label_correct"]))
        total += out["steps"]
    return correct / total if total else 0.0


def heldout_f1(model: PointerScorer, corpus) -> float:
    from .decoder import greedy_parse
    from .evaluation import parseval
    from .treebank import postprocess

    gold = [postprocess(replay(oracle, tokens)) for tokens, oracle in corpus]
    pred = [greedy_parse(model, tokens) for tokens, _ in corpus]
    return parseval(gold, pred).f1


@dataclass
class TrainResult:
    model: PointerScorer
    history: list[dict] = field(default_factory=list)
    optimizer: Adam | None = None


def train(model: PointerScorer, corpus, cfg: TrainConfig, dev=None, log_file=None) -> TrainResult:
    """Train ``model`` in place on ``(tokens, OracleSequence)`` pairs.

    ``dev`` defaults to a seeded 10% split of ``corpus``; pass ``dev=[]`` to
    train on everything without held-out metrics.
    """
    cfg.validate()
    if not corpus:
        raise ValueError("empty corpus")
    for i, (tokens, oracle) in enumerate(corpus):
        if len(tokens) != oracle.n:
            raise ValueError(f"sentence {i}: oracle length mismatch")
        replay(oracle)
    shuffle_rng = np.random.default_rng(cfg.seed)
    dropout_rng = np.random.default_rng(cfg.seed + 1)
    if dev is None:
        corpus = list(corpus)
        k = max(1, len(corpus) // 10) if len(corpus) > 1 else 0
        held = set(shuffle_rng.choice(len(corpus), size=k, replace=False).tolist()) if k else set()
        dev = [x for i, x in enumerate(corpus) if i in held]
        corpus = [x for i, x in enumerate(corpus) if i not in held]
    batches = make_batches(corpus, cfg)
    total_steps = cfg.epochs * len(batches)
    schedule = LinearWarmupDecay(cfg.peak_lr, total_steps, cfg.warmup_fraction)
    opt = Adam(model.params, cfg.beta1, cfg.beta2, cfg.eps)
    history = []
    step = 0

    def record(epoch, lr, loss, with_f1):
        entry = {"epoch": epoch, "step": step, "lr": lr, "loss": loss,
                 "heldout_action_acc": action_accuracy(model, dev) if dev else None,
                 "heldout_f1": heldout_f1(model, dev) if dev and with_f1 else None}
        history.append(entry)
        if log_file is not None:
            log_file.write(json.dumps(entry) + "\n")
            log_file.flush()
        log.info("epoch %d step %d lr %.3g loss %.4f acc %s f1 %s", epoch, step, lr, loss,
                 entry["heldout_action_acc"], entry["heldout_f1"])

    for epoch in range(1, cfg.epochs + 1):
        epoch_loss = 0.0
        lr = 0.0
        for b, batch in enumerate(make_batches(corpus, cfg, shuffle_rng)):
            step += 1
            grads = None
            batch_loss = 0.0
            for i in batch:
                tokens, oracle = corpus[i]
                loss, g = model.sequence_loss(tokens, oracle, rng=dropout_rng)
                if not math.isfinite(loss):
                    raise FloatingPointError(f"non-finite loss at step {step}, batch {b}")
                batch_loss += loss
                if grads is None:
                    grads = g
                else:
                    for k, v in g.items():
                        grads[k] += v
            clip_gradients(grads, cfg.grad_clip)
            lr = schedule(step)
            opt.step(model.params, grads, lr)
            epoch_loss += batch_loss
            if cfg.eval_every and step % cfg.eval_every == 0:
                record(epoch, lr, batch_loss / len(batch), True)
        record(epoch, lr, epoch_loss / len(corpus), epoch == cfg.epochs)
    return TrainResult(model, history, opt)


def config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
