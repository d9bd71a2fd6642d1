"""Pointer-network scorer with hand-written backpropagation (float64 numpy).

Architecture, for a sentence w_1..w_n wrapped in <bos>/<eos>:

* token embeddings -> stacked bidirectional LSTM -> forward states f_i,
  backward states g_i; boundary i is b_i = [f_i; g_{i+1}] for i = 0..n
* span (i, j) is tanh-MLP_span(b_j - b_i)
* decoder LSTM: d_t = LSTM(d_{t-1}, [span_{t-1}; E[y_{t-1}]]), started from a
  trainable d_0 and a trainable <START> input
* pointing score s_i = [b'_i; 1]^T W_point d'_t, with b' = MLP_point(b),
  d' = MLP_cursor(d)
* label scores e = MLP_label([d_t; b_r - b_l]) E^T, tied to the decoder's
  label embeddings E
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .oracle import OracleSequence
from .pointing import apply_action, initial_config, legal_targets
from .treebank import EMPTY

UNK, BOS, EOS = "<unk>", "<bos>", "<eos>"


@dataclass
class ScorerConfig:
    vocab_size: int = 0
    embed_dim: int = 32
    encoder_hidden: int = 32
    encoder_layers: int = 1
    decoder_hidden: int = 64
    mlp_hidden: int = 32
    label_count: int = 0
    label_embed_dim: int = 16
    use_prev_label: bool = True
    legal_normalization: bool = False
    dropout_rate: float = 0.33
    seed: int = 0

    def validate(self):
        for name in ("vocab_size", "embed_dim", "encoder_hidden", "encoder_layers",
                     "decoder_hidden", "mlp_hidden", "label_count", "label_embed_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @property
    def decoder_input_dim(self) -> int:
        return self.mlp_hidden + (self.label_embed_dim if self.use_prev_label else 0)

    def to_dict(self):
        return asdict(self)


class Vocabulary:
    def __init__(self, words):
        self.itos = [UNK, BOS, EOS] + [w for w in words if w not in (UNK, BOS, EOS)]
        self.stoi = {w: i for i, w in enumerate(self.itos)}

    @classmethod
    def build(cls, sentences, min_count=2):
        counts = Counter(w for s in sentences for w in s)
        return cls(sorted(w for w, c in counts.items() if c >= min_count))

    def __len__(self):
        return len(self.itos)

    def ids(self, tokens) -> np.ndarray:
        unk = self.stoi[UNK]
        body = [self.stoi.get(t, unk) for t in tokens]
        return np.array([self.stoi[BOS]] + body + [self.stoi[EOS]], dtype=np.int64)


class LabelSet:
    """Label inventory; EMPTY is always id 0."""

    def __init__(self, labels):
        self.itos = [EMPTY] + sorted(set(labels) - {EMPTY})
        self.stoi = {lab: i for i, lab in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    def __getitem__(self, i):
        return self.itos[i]

    def id(self, label):
        try:
            return self.stoi[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in inventory") from None


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


# ---------------------------------------------------------------------------
# LSTM and MLP building blocks


def lstm_forward(W, b, X, h0, c0):
    """Run an LSTM over rows of X.  W is (4H, I+H) with gate order i, f, o, g."""
    T, I = X.shape
    H = h0.shape[0]
    Wx, Wh = W[:, :I], W[:, I:]
    Zx = X @ Wx.T + b
    hs = np.empty((T + 1, H))
    cs = np.empty((T + 1, H))
    acts = np.empty((T, 4 * H))
    hs[0], cs[0] = h0, c0
    for t in range(T):
        z = Zx[t] + Wh @ hs[t]
        a = acts[t]
        a[:3 * H] = sigmoid(z[:3 * H])
        a[3 * H:] = np.tanh(z[3 * H:])
        cs[t + 1] = a[H:2 * H] * cs[t] + a[:H] * a[3 * H:]
        hs[t + 1] = a[2 * H:3 * H] * np.tanh(cs[t + 1])
    return hs[1:], (W, X, hs, cs, acts)


def lstm_backward(dH, cache):
    W, X, hs, cs, acts = cache
    T, I = X.shape
    H = hs.shape[1]
    Wh = W[:, I:]
    dZ = np.empty((T, 4 * H))
    dh = np.zeros(H)
    dc = np.zeros(H)
    for t in range(T - 1, -1, -1):
        a = acts[t]
        i, f, o, g = a[:H], a[H:2 * H], a[2 * H:3 * H], a[3 * H:]
        tc = np.tanh(cs[t + 1])
        dh = dh + dH[t]
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:H] = dc * g * i * (1.0 - i)
        dz[H:2 * H] = dc * cs[t] * f * (1.0 - f)
        dz[2 * H:3 * H] = dh * tc * o * (1.0 - o)
        dz[3 * H:] = dc * i * (1.0 - g * g)
        dc = dc * f
        dh = Wh.T @ dz
    dW = np.concatenate([dZ.T @ X, dZ.T @ hs[:-1]], axis=1)
    db = dZ.sum(axis=0)
    dX = dZ @ W[:, :I]
    return dW, db, dX, dh, dc


def _dropout_mask(rng, shape, rate):
    if rng is None or rate == 0.0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def mlp_forward(W, b, X, mask=None):
    Y = np.tanh(X @ W.T + b)
    out = Y if mask is None else Y * mask
    return out, (W, X, Y, mask)


def mlp_backward(dOut, cache):
    W, X, Y, mask = cache
    dY = dOut if mask is None else dOut * mask
    dPre = dY * (1.0 - Y * Y)
    return dPre.T @ X, dPre.sum(axis=0), dPre @ W


def log_softmax(x, axis=-1):
    m = np.max(x, axis=axis, keepdims=True)
    z = x - m
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


# ---------------------------------------------------------------------------


class EncodedSentence(NamedTuple):
    boundary_reps: np.ndarray  # (n+1, 2H)
    point_reps: np.ndarray     # (n+1, k+1), bias-augmented MLP_point output

    @property
    def n(self) -> int:
        return self.boundary_reps.shape[0] - 1


class DecoderState(NamedTuple):
    h: np.ndarray
    c: np.ndarray


START = None


def init_params(cfg: ScorerConfig) -> dict[str, np.ndarray]:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)

    def unif(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    def lstm_bias(H):
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        return b

    H, Hd, k, Le = cfg.encoder_hidden, cfg.decoder_hidden, cfg.mlp_hidden, cfg.label_embed_dim
    p = {"embed": rng.normal(0.0, 1.0 / np.sqrt(cfg.embed_dim), (cfg.vocab_size, cfg.embed_dim))}
    in_dim = cfg.embed_dim
    for layer in range(cfg.encoder_layers):
        for d in ("fw", "bw"):
            p[f"enc{layer}_{d}_W"] = unif((4 * H, in_dim + H), in_dim + H)
            p[f"enc{layer}_{d}_b"] = lstm_bias(H)
        in_dim = 2 * H
    Din = cfg.decoder_input_dim
    p["dec_W"] = unif((4 * Hd, Din + Hd), Din + Hd)
    p["dec_b"] = lstm_bias(Hd)
    p["d0"] = unif(Hd, Hd)
    p["start"] = unif(Din, Din)
    p["span_W"] = unif((k, 2 * H), 2 * H)
    p["span_b"] = np.zeros(k)
    p["cursor_W"] = unif((k, Hd), Hd)
    p["cursor_b"] = np.zeros(k)
    p["point_W"] = unif((k, 2 * H), 2 * H)
    p["point_b"] = np.zeros(k)
    p["W_point"] = unif((k + 1, k), k)
    p["label_W1"] = unif((k, Hd + 2 * H), Hd + 2 * H)
    p["label_b1"] = np.zeros(k)
    p["label_W2"] = unif((Le, k), k)
    p["label_b2"] = np.zeros(Le)
    p["E"] = rng.normal(0.0, 1.0 / np.sqrt(Le), (cfg.label_count, Le))
    return p


def param_shapes(cfg: ScorerConfig) -> dict[str, tuple[int, ...]]:
    return {name: arr.shape for name, arr in init_params(cfg).items()}


class PointerScorer:
    def __init__(self, config: ScorerConfig, vocab: Vocabulary, labels: LabelSet, params=None):
        config.vocab_size = len(vocab)
        config.label_count = len(labels)
        config.validate()
        self.config = config
        self.vocab = vocab
        self.labels = labels
        self.params = init_params(config) if params is None else params

    # -- inference-time pieces ---------------------------------------------

    def _encode(self, ids, rng=None):
        p, cfg = self.params, self.config
        rate = cfg.dropout_rate
        caches = []
        X = p["embed"][ids]
        m = _dropout_mask(rng, X.shape, rate)
        caches.append(m)
        if m is not None:
            X = X * m
        H = cfg.encoder_hidden
        zeros = np.zeros(H)
        for layer in range(cfg.encoder_layers):
            F, cf = lstm_forward(p[f"enc{layer}_fw_W"], p[f"enc{layer}_fw_b"], X, zeros, zeros)
            Gr, cb = lstm_forward(p[f"enc{layer}_bw_W"], p[f"enc{layer}_bw_b"], X[::-1], zeros, zeros)
            X = np.concatenate([F, Gr[::-1]], axis=1)
            m = _dropout_mask(rng, X.shape, rate)
            if m is not None:
                X = X * m
            caches.append((cf, cb, m))
        B = np.concatenate([X[:-1, :H], X[1:, H:]], axis=1)
        return B, caches

    def encode(self, tokens) -> EncodedSentence:
        if len(tokens) == 0:
            raise ValueError("cannot encode an empty sentence")
        B, _ = self._encode(self.vocab.ids(tokens))
        Bp, _ = mlp_forward(self.params["point_W"], self.params["point_b"], B)
        return EncodedSentence(B, np.concatenate([Bp, np.ones((B.shape[0], 1))], axis=1))

    def span_rep(self, enc: EncodedSentence, left: int, right: int) -> np.ndarray:
        if not 0 <= left < right <= enc.n:
            raise ValueError(f"invalid span ({left}, {right})")
        diff = enc.boundary_reps[right] - enc.boundary_reps[left]
        return np.tanh(self.params["span_W"] @ diff + self.params["span_b"])

    def initial_state(self) -> DecoderState:
        return DecoderState(self.params["d0"], np.zeros(self.config.decoder_hidden))

    def decoder_input(self, enc, prev_span, prev_label) -> np.ndarray:
        if prev_span is START:
            return self.params["start"]
        x = self.span_rep(enc, *prev_span)
        if self.config.use_prev_label:
            x = np.concatenate([x, self.params["E"][prev_label]])
        return x

    def decoder_step(self, prev_state, prev_span, prev_label, enc) -> DecoderState:
        """One decoder step.  ``prev_span`` is ``START`` (None) on the first
        step, in which case ``prev_state`` should be :meth:`initial_state`."""
        if prev_state is START:
            prev_state = self.initial_state()
        x = self.decoder_input(enc, prev_span, prev_label)
        Hd = self.config.decoder_hidden
        z = self.params["dec_W"] @ np.concatenate([x, prev_state.h]) + self.params["dec_b"]
        i, f, o = sigmoid(z[:Hd]), sigmoid(z[Hd:2 * Hd]), sigmoid(z[2 * Hd:3 * Hd])
        g = np.tanh(z[3 * Hd:])
        c = f * prev_state.c + i * g
        return DecoderState(o * np.tanh(c), c)

    def pointing_scores(self, state: DecoderState, enc: EncodedSentence) -> np.ndarray:
        dc = np.tanh(self.params["cursor_W"] @ state.h + self.params["cursor_b"])
        return enc.point_reps @ (self.params["W_point"] @ dc)

    def label_scores(self, state: DecoderState, enc: EncodedSentence, span) -> np.ndarray:
        left, right = span
        if not 0 <= left < right <= enc.n:
            raise ValueError(f"invalid span ({left}, {right})")
        p = self.params
        x = np.concatenate([state.h, enc.boundary_reps[right] - enc.boundary_reps[left]])
        hid = np.tanh(p["label_W1"] @ x + p["label_b1"])
        H = p["label_W2"] @ hid + p["label_b2"]
        return p["E"] @ H

    # -- training ----------------------------------------------------------

    def oracle_arrays(self, oracle: OracleSequence):
        """Targets, label ids, spans and legal-target sets for each step."""
        config = initial_config(oracle.n)
        targets, labels, spans, legal = [], [], [], []
        for action in oracle.actions:
            legal.append(legal_targets(config))
            c = config.cursor
            spans.append((min(c, action.target), max(c, action.target)))
            targets.append(action.target)
            labels.append(self.labels.id(action.label))
            config = apply_action(config, action)
        return np.array(targets), np.array(labels), np.array(spans), legal

    def forward(self, tokens, oracle: OracleSequence, rng=None, backward=True):
        """Teacher-forced pass.  Returns a dict with ``loss``, its two parts,
        per-step predictions and (if ``backward``) ``grads``."""
        if len(tokens) != oracle.n:
            raise ValueError(f"oracle length n={oracle.n} but sentence has {len(tokens)} tokens")
        p, cfg = self.params, self.config
        rate = cfg.dropout_rate
        n = oracle.n
        targets, ylab, spans, legal = self.oracle_arrays(oracle)
        m = len(targets)
        ids = self.vocab.ids(tokens)
        B, enc_caches = self._encode(ids, rng)
        L = spans[:, 0]
        R = spans[:, 1]

        # decoder inputs: START then previous spans / labels
        if m > 1:
            diffs = B[R[:-1]] - B[L[:-1]]
            Hs, span_cache = mlp_forward(p["span_W"], p["span_b"], diffs,
                                         _dropout_mask(rng, (m - 1, cfg.mlp_hidden), rate))
            prev = Hs
            if cfg.use_prev_label:
                prev = np.concatenate([Hs, p["E"][ylab[:-1]]], axis=1)
            Xd = np.vstack([p["start"][None, :], prev])
        else:
            Xd = p["start"][None, :]
        D, dec_cache = lstm_forward(p["dec_W"], p["dec_b"], Xd, p["d0"], np.zeros(cfg.decoder_hidden))

        # pointing
        Bp, point_cache = mlp_forward(p["point_W"], p["point_b"], B,
                                      _dropout_mask(rng, (n + 1, cfg.mlp_hidden), rate))
        Dc, cursor_cache = mlp_forward(p["cursor_W"], p["cursor_b"], D,
                                       _dropout_mask(rng, (m, cfg.mlp_hidden), rate))
        Baug = np.concatenate([Bp, np.ones((n + 1, 1))], axis=1)
        S = Dc @ (Baug @ p["W_point"]).T  # (m, n+1)
        if cfg.legal_normalization:
            mask = np.full_like(S, -np.inf)
            for t, ok in enumerate(legal):
                mask[t, ok] = 0.0
            Sn = S + mask
        else:
            Sn = S
        logp = log_softmax(Sn, axis=1)
        steps = np.arange(m)
        point_loss = -logp[steps, targets].sum()

        # labels
        Xl = np.concatenate([D, B[R] - B[L]], axis=1)
        Hh, lab1_cache = mlp_forward(p["label_W1"], p["label_b1"], Xl,
                                     _dropout_mask(rng, (m, cfg.mlp_hidden), rate))
        Hl = Hh @ p["label_W2"].T + p["label_b2"]
        logits = Hl @ p["E"].T
        logq = log_softmax(logits, axis=1)
        label_loss = -logq[steps, ylab].sum()

        pred_targets = np.array([ok[int(np.argmax(S[t, ok]))] for t, ok in enumerate(legal)])
        out = {
            "loss": point_loss + label_loss,
            "pointing_loss": point_loss,
            "labeling_loss": label_loss,
            "steps": m,
            "point_correct": pred_targets == targets,
            "label_correct": np.argmax(logits, axis=1) == ylab,
        }
        if not backward:
            return out

        g = {name: np.zeros_like(arr) for name, arr in p.items()}
        # labeling
        dlogits = np.exp(logq)
        dlogits[steps, ylab] -= 1.0
        g["E"] += dlogits.T @ Hl
        dHl = dlogits @ p["E"]
        g["label_W2"] += dHl.T @ Hh
        g["label_b2"] += dHl.sum(axis=0)
        dW1, db1, dXl = mlp_backward(dHl @ p["label_W2"], lab1_cache)
        g["label_W1"] += dW1
        g["label_b1"] += db1
        Hd = cfg.decoder_hidden
        dD = dXl[:, :Hd].copy()
        dB = np.zeros_like(B)
        np.add.at(dB, R, dXl[:, Hd:])
        np.subtract.at(dB, L, dXl[:, Hd:])

        # pointing
        dS = np.exp(logp)
        dS[steps, targets] -= 1.0
        BW = Baug @ p["W_point"]
        g["W_point"] += Baug.T @ (dS.T @ Dc)
        dDc = dS @ BW
        dBaug = dS.T @ (Dc @ p["W_point"].T)
        dW, db, dD_c = mlp_backward(dDc, cursor_cache)
        g["cursor_W"] += dW
        g["cursor_b"] += db
        dD += dD_c
        dW, db, dB_p = mlp_backward(dBaug[:, :-1], point_cache)
        g["point_W"] += dW
        g["point_b"] += db
        dB += dB_p

        # decoder
        dW, db, dXd, dh0, _ = lstm_backward(dD, dec_cache)
        g["dec_W"] += dW
        g["dec_b"] += db
        g["d0"] += dh0
        g["start"] += dXd[0]
        if m > 1:
            k = cfg.mlp_hidden
            if cfg.use_prev_label:
                np.add.at(g["E"], ylab[:-1], dXd[1:, k:])
            dW, db, ddiffs = mlp_backward(dXd[1:, :k], span_cache)
            g["span_W"] += dW
            g["span_b"] += db
            np.add.at(dB, R[:-1], ddiffs)
            np.subtract.at(dB, L[:-1], ddiffs)

        # encoder
        H = cfg.encoder_hidden
        dX = np.zeros((n + 2, 2 * H))
        dX[:-1, :H] += dB[:, :H]
        dX[1:, H:] += dB[:, H:]
        for layer in range(cfg.encoder_layers - 1, -1, -1):
            cf, cb, mask = enc_caches[layer + 1]
            if mask is not None:
                dX = dX * mask
            dW, db, dXf, _, _ = lstm_backward(dX[:, :H], cf)
            g[f"enc{layer}_fw_W"] += dW
            g[f"enc{layer}_fw_b"] += db
            dW, db, dXb, _, _ = lstm_backward(dX[::-1, H:], cb)
            g[f"enc{layer}_bw_W"] += dW
            g[f"enc{layer}_bw_b"] += db
            dX = dXf + dXb[::-1]
        if enc_caches[0] is not None:
            dX = dX * enc_caches[0]
        np.add.at(g["embed"], ids, dX)
        out["grads"] = g
        return out

    def sequence_loss(self, tokens, oracle: OracleSequence, rng=None):
        """Summed pointing + labeling negative log-likelihood and its gradient.

        Dropout is active only when ``rng`` is given.
        """
        out = self.forward(tokens, oracle, rng=rng)
        return out["loss"], out["grads"]
