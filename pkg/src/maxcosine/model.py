"""LSTM encoder, dropout placement, softmax decision layer, and exact backward
passes for the base and biway architectures."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import SentencePair, LABEL_NAMES
from .embeddings import DEFAULT_OOV_WINDOW, EmbeddingLibrary
from .matching import AugmentedSequence, build_augmented_sequence
from .numerics import sigmoid, sigmoid_grad, softmax, tanh_grad

N_LABELS = 3


@dataclass
class ModelConfig:
    embedding_dim: int          # d of the (possibly concatenated) library
    k: int = 300                # LSTM hidden size
    dropout_rate: float = 0.0   # applied to LSTM input and output, train mode only
    biway: bool = False
    bi_embedding: bool = False
    seed: int = 0
    oov_window: int = DEFAULT_OOV_WINDOW

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.k <= 0 or self.embedding_dim <= 0:
            raise ValueError("k and embedding_dim must be positive")

    @property
    def input_dim(self) -> int:
        return 2 * self.embedding_dim


@dataclass
class LstmParams:
    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1] - self.hidden_size


@dataclass
class SoftmaxParams:
    W_s: np.ndarray  # (3, k) base, (3, 2k) biway
    b_s: np.ndarray  # (3,)


@dataclass
class EncodeTrace:
    """Per-timestep activations cached by the forward pass for BPTT."""

    H: np.ndarray        # (m, input_dim + k) concatenated [dropped z_t || h_{t-1}]
    i: np.ndarray        # (m, k)
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray        # tanh candidate values
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray
    out_mask: Optional[np.ndarray]  # (k,) inverted-dropout mask on h_m, or None
    h_final: np.ndarray  # h_m after output dropout (train) or identity (eval)

    def __len__(self) -> int:
        return self.H.shape[0]


@dataclass
class ForwardTrace:
    enc_h: EncodeTrace                 # hypothesis-conditioned-on-premise encoder
    enc_p: Optional[EncodeTrace]       # premise-conditioned-on-hypothesis (biway)
    h_out: np.ndarray                  # vector fed to the softmax layer
    probabilities: np.ndarray


class Model:
    def __init__(
        self,
        config: ModelConfig,
        lstm_h: LstmParams,
        softmax_params: SoftmaxParams,
        lstm_p: Optional[LstmParams] = None,
    ):
        if config.biway and lstm_p is None:
            raise ValueError("biway model requires a second LstmParams")
        self.config = config
        self.lstm_h = lstm_h
        self.lstm_p = lstm_p
        self.softmax = softmax_params

    def parameters(self) -> dict[str, np.ndarray]:
        """Live views of every trainable array, in a fixed deterministic order."""
        out: dict[str, np.ndarray] = {}
        groups = [("lstm_h", self.lstm_h)]
        if self.config.biway:
            groups.append(("lstm_p", self.lstm_p))
        for prefix, p in groups:
            for name in ("W_i", "W_f", "W_o", "W_c", "b_i", "b_f", "b_o", "b_c"):
                out[f"{prefix}.{name}"] = getattr(p, name)
        out["softmax.W_s"] = self.softmax.W_s
        out["softmax.b_s"] = self.softmax.b_s
        return out

    def copy(self) -> "Model":
        return Model(
            config=copy.deepcopy(self.config),
            lstm_h=copy.deepcopy(self.lstm_h),
            softmax_params=copy.deepcopy(self.softmax),
            lstm_p=copy.deepcopy(self.lstm_p),
        )


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _init_lstm(rng: np.random.Generator, k: int, input_dim: int) -> LstmParams:
    shape = (k, input_dim + k)
    return LstmParams(
        W_i=_glorot(rng, *shape),
        W_f=_glorot(rng, *shape),
        W_o=_glorot(rng, *shape),
        W_c=_glorot(rng, *shape),
        b_i=np.zeros(k),
        b_f=np.zeros(k),
        b_o=np.zeros(k),
        b_c=np.zeros(k),
    )


def init_model(config: ModelConfig, rng: np.random.Generator) -> Model:
    """Uniform Glorot weights, zero biases; biway allocates two independent LSTMs."""
    lstm_h = _init_lstm(rng, config.k, config.input_dim)
    lstm_p = _init_lstm(rng, config.k, config.input_dim) if config.biway else None
    softmax_cols = 2 * config.k if config.biway else config.k
    softmax_params = SoftmaxParams(
        W_s=_glorot(rng, N_LABELS, softmax_cols), b_s=np.zeros(N_LABELS)
    )
    return Model(config, lstm_h, softmax_params, lstm_p)


def dropout_mask(rng: np.random.Generator, size: int, rate: float) -> np.ndarray:
    """Inverted-dropout mask: entries are 0 or 1/(1-rate)."""
    return (rng.random(size) >= rate) / (1.0 - rate)


def lstm_step(
    params: LstmParams, z_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray
) -> tuple[np.ndarray, np.ndarray, dict]:
    if z_t.shape[0] != params.input_dim:
        raise ValueError(f"input length {z_t.shape[0]} != expected {params.input_dim}")
    if h_prev.shape[0] != params.hidden_size or c_prev.shape[0] != params.hidden_size:
        raise ValueError("state length does not match hidden size")
    H = np.concatenate([z_t, h_prev])
    i = sigmoid(params.W_i @ H + params.b_i)
    f = sigmoid(params.W_f @ H + params.b_f)
    o = sigmoid(params.W_o @ H + params.b_o)
    g = np.tanh(params.W_c @ H + params.b_c)
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return h, c, {"H": H, "i": i, "f": f, "o": o, "g": g, "c": c, "tanh_c": tanh_c}


def encode_sequence(
    params: LstmParams,
    Z: np.ndarray,
    dropout_rate: float,
    train: bool,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, EncodeTrace]:
    """Run the LSTM over the (m, input_dim) augmented sequence from zero state.

    Train mode applies inverted dropout to each input and to the final hidden
    state; eval mode is deterministic and dropout-free.
    """
    m = Z.shape[0]
    if m == 0:
        raise ValueError("empty sequence")
    k = params.hidden_size
    drop = train and dropout_rate > 0.0
    if drop and rng is None:
        raise ValueError("train-mode dropout needs an rng")
    dt = np.result_type(Z.dtype, params.W_i.dtype, np.float64)
    cache = {key: np.empty((m, k), dtype=dt) for key in ("i", "f", "o", "g", "c", "tanh_c", "h")}
    Hs = np.empty((m, Z.shape[1] + k), dtype=dt)
    h = np.zeros(k, dtype=dt)
    c = np.zeros(k, dtype=dt)
    for t in range(m):
        z_t = Z[t] * dropout_mask(rng, Z.shape[1], dropout_rate) if drop else Z[t]
        h, c, step = lstm_step(params, z_t, h, c)
        Hs[t] = step["H"]
        for key in ("i", "f", "o", "g", "c", "tanh_c"):
            cache[key][t] = step[key]
        cache["h"][t] = h
    out_mask = dropout_mask(rng, k, dropout_rate) if drop else None
    h_final = h * out_mask if drop else h
    trace = EncodeTrace(
        H=Hs,
        i=cache["i"],
        f=cache["f"],
        o=cache["o"],
        g=cache["g"],
        c=cache["c"],
        tanh_c=cache["tanh_c"],
        h=cache["h"],
        out_mask=out_mask,
        h_final=h_final,
    )
    return h_final, trace


def decide(softmax_params: SoftmaxParams, h: np.ndarray) -> tuple[np.ndarray, int]:
    """Linear layer + softmax; label is the 1-based argmax, ties to the smaller index."""
    if h.shape[0] != softmax_params.W_s.shape[1]:
        raise ValueError(
            f"hidden length {h.shape[0]} != softmax width {softmax_params.W_s.shape[1]}"
        )
    p = softmax_params.W_s @ h + softmax_params.b_s
    probs = softmax(p)
    return probs, int(np.argmax(probs)) + 1


def label_name(label: int) -> str:
    return LABEL_NAMES[label]


def augment_pair(
    pair: SentencePair, lib: EmbeddingLibrary, config: ModelConfig
) -> tuple[AugmentedSequence, Optional[AugmentedSequence]]:
    """Matching step: hypothesis|premise always, premise|hypothesis when biway."""
    z_h = build_augmented_sequence(
        pair.hypothesis_tokens, pair.premise_tokens, lib, window=config.oov_window
    )
    z_p = None
    if config.biway:
        z_p = build_augmented_sequence(
            pair.premise_tokens, pair.hypothesis_tokens, lib, window=config.oov_window
        )
    return z_h, z_p


def forward_from_sequences(
    model: Model,
    Z_h: np.ndarray,
    Z_p: Optional[np.ndarray],
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, ForwardTrace]:
    cfg = model.config
    rate = cfg.dropout_rate
    h_h, enc_h = encode_sequence(model.lstm_h, Z_h, rate, train, rng)
    if cfg.biway:
        if Z_p is None:
            raise ValueError("biway forward needs the premise-side sequence")
        h_p, enc_p = encode_sequence(model.lstm_p, Z_p, rate, train, rng)
        h_out = np.concatenate([h_p, h_h])  # premise-side first
    else:
        enc_p = None
        h_out = h_h
    probs, _ = decide(model.softmax, h_out)
    return probs, ForwardTrace(enc_h=enc_h, enc_p=enc_p, h_out=h_out, probabilities=probs)


def forward(
    model: Model,
    pair: SentencePair,
    lib: EmbeddingLibrary,
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """Full forward pass: matching, encoding, decision."""
    z_h, z_p = augment_pair(pair, lib, model.config)
    return forward_from_sequences(
        model, z_h.vectors(), z_p.vectors() if z_p is not None else None, train, rng
    )


def forward_base(model, pair, lib, train=False, rng=None):
    if model.config.biway:
        raise ValueError("forward_base called on a biway model")
    return forward(model, pair, lib, train, rng)


def forward_biway(model, pair, lib, train=False, rng=None):
    if not model.config.biway:
        raise ValueError("forward_biway called on a base model")
    return forward(model, pair, lib, train, rng)


def _bptt(params: LstmParams, trace: EncodeTrace, dh_last: np.ndarray) -> dict[str, np.ndarray]:
    k = params.hidden_size
    input_dim = params.input_dim
    grads = {
        "W_i": np.zeros_like(params.W_i),
        "W_f": np.zeros_like(params.W_f),
        "W_o": np.zeros_like(params.W_o),
        "W_c": np.zeros_like(params.W_c),
        "b_i": np.zeros(k),
        "b_f": np.zeros(k),
        "b_o": np.zeros(k),
        "b_c": np.zeros(k),
    }
    dh = dh_last
    dc = np.zeros(k)
    for t in range(len(trace) - 1, -1, -1):
        i, f, o, g = trace.i[t], trace.f[t], trace.o[t], trace.g[t]
        tanh_c = trace.tanh_c[t]
        c_prev = trace.c[t - 1] if t > 0 else np.zeros(k)
        do = dh * tanh_c
        dc = dc + dh * o * tanh_grad(tanh_c)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        da_i = di * sigmoid_grad(i)
        da_f = df * sigmoid_grad(f)
        da_o = do * sigmoid_grad(o)
        da_c = dg * tanh_grad(g)
        H = trace.H[t]
        grads["W_i"] += np.outer(da_i, H)
        grads["W_f"] += np.outer(da_f, H)
        grads["W_o"] += np.outer(da_o, H)
        grads["W_c"] += np.outer(da_c, H)
        grads["b_i"] += da_i
        grads["b_f"] += da_f
        grads["b_o"] += da_o
        grads["b_c"] += da_c
        dH = (
            params.W_i.T @ da_i
            + params.W_f.T @ da_f
            + params.W_o.T @ da_o
            + params.W_c.T @ da_c
        )
        dh = dH[input_dim:]
        dc = dc * f
    return grads


def backward(model: Model, trace: ForwardTrace, gold_label: int) -> dict[str, np.ndarray]:
    """Gradients of the cross-entropy loss for one pair, keyed like parameters().

    Embedding vectors receive no gradient; they are fixed inputs.
    """
    if gold_label not in LABEL_NAMES:
        raise ValueError(f"invalid gold label {gold_label}")
    probs = trace.probabilities
    dp = probs.copy()
    dp[gold_label - 1] -= 1.0
    grads: dict[str, np.ndarray] = {
        "softmax.W_s": np.outer(dp, trace.h_out),
        "softmax.b_s": dp.copy(),
    }
    dh_out = model.softmax.W_s.T @ dp
    k = model.config.k
    if model.config.biway:
        dh_p, dh_h = dh_out[:k], dh_out[k:]
        if trace.enc_p.out_mask is not None:
            dh_p = dh_p * trace.enc_p.out_mask
        if trace.enc_h.out_mask is not None:
            dh_h = dh_h * trace.enc_h.out_mask
        for name, g in _bptt(model.lstm_p, trace.enc_p, dh_p).items():
            grads[f"lstm_p.{name}"] = g
    else:
        dh_h = dh_out
        if trace.enc_h.out_mask is not None:
            dh_h = dh_h * trace.enc_h.out_mask
    for name, g in _bptt(model.lstm_h, trace.enc_h, dh_h).items():
        grads[f"lstm_h.{name}"] = g
    return {name: grads[name] for name in model.parameters()}
