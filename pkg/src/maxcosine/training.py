"""Cross-entropy objective, Adam optimizer, mini-batch training loop, evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import SentencePair
from .embeddings import DEFAULT_OOV_WINDOW, EmbeddingLibrary
from .model import Model, ModelConfig, backward, forward, init_model
from .numerics import make_rng

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-300  # keeps the loss finite under pathological confidence


class DivergenceError(RuntimeError):
    """Non-finite loss or gradients during training."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 128
    epochs: int = 10
    dropout_rate: float = 0.0
    seed: int = 0
    k: int = 300
    biway: bool = False
    bi_embedding: bool = False
    oov_window: int = DEFAULT_OOV_WINDOW
    # optional early exit once validation accuracy reaches this value
    target_val_accuracy: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def model_config(self, embedding_dim: int) -> ModelConfig:
        return ModelConfig(
            embedding_dim=embedding_dim,
            k=self.k,
            dropout_rate=self.dropout_rate,
            biway=self.biway,
            bi_embedding=self.bi_embedding,
            seed=self.seed,
            oov_window=self.oov_window,
        )


def cross_entropy(probabilities: Sequence[np.ndarray], gold: Sequence[int]) -> float:
    """Mean negative log-probability of the gold label over the batch."""
    if len(probabilities) == 0:
        raise ValueError("empty batch")
    if len(probabilities) != len(gold):
        raise ValueError("batch size mismatch between predictions and labels")
    total = 0.0
    for probs, label in zip(probabilities, gold):
        total -= np.log(max(probs[label - 1], LOG_FLOOR))
    return total / len(probabilities)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(a) for k, a in params.items()},
            v={k: np.zeros_like(a) for k, a in params.items()},
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> None:
    """One in-place Adam update with bias correction."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient in {name}")
    state.t += 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for name, theta in params.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        theta -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # (3, 3) counts, rows gold, cols predicted
    total: int


@dataclass
class TrainResult:
    best_model: Model
    best_epoch: int
    best_val_accuracy: float
    history: list[EpochMetrics] = field(default_factory=list)


def evaluate(pairs: Sequence[SentencePair], model: Model, lib: EmbeddingLibrary) -> EvalResult:
    if lib.dim != model.config.embedding_dim:
        raise ValueError(
            f"library dimension {lib.dim} != checkpoint embedding_dim "
            f"{model.config.embedding_dim}"
        )
    confusion = np.zeros((3, 3), dtype=np.int64)
    for pair in pairs:
        probs, _ = forward(model, pair, lib, train=False)
        pred = int(np.argmax(probs)) + 1
        confusion[pair.label - 1, pred - 1] += 1
    total = len(pairs)
    accuracy = float(np.trace(confusion)) / total if total else 0.0
    return EvalResult(accuracy=accuracy, confusion=confusion, total=total)


def train(
    train_pairs: Sequence[SentencePair],
    val_pairs: Sequence[SentencePair],
    config: TrainConfig,
    lib: EmbeddingLibrary,
    metrics_path=None,
    verbose: bool = False,
) -> TrainResult:
    """Seeded mini-batch training; returns the checkpoint with the best validation
    accuracy (ties resolved toward the earlier epoch)."""
    if not train_pairs or not val_pairs:
        raise ValueError("train and validation sets must be non-empty")
    rng = make_rng(config.seed)
    model = init_model(config.model_config(lib.dim), rng)
    params = model.parameters()
    state = AdamState.for_params(params)

    best_model = model.copy()
    best_epoch = 0
    best_acc = -1.0
    history: list[EpochMetrics] = []
    n = len(train_pairs)
    metrics_fh = open(metrics_path, "w", encoding="utf-8") if metrics_path else None
    try:
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n)
            loss_sum = 0.0
            for start in range(0, n, config.batch_size):
                batch = order[start : start + config.batch_size]
                grad_sum = {name: np.zeros_like(a) for name, a in params.items()}
                for idx in batch:
                    pair = train_pairs[idx]
                    probs, trace = forward(model, pair, lib, train=True, rng=rng)
                    p_gold = max(probs[pair.label - 1], LOG_FLOOR)
                    loss = -np.log(p_gold)
                    if not np.isfinite(loss):
                        raise DivergenceError(
                            f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                        )
                    loss_sum += loss
                    for name, g in backward(model, trace, pair.label).items():
                        grad_sum[name] += g
                for name in grad_sum:
                    grad_sum[name] /= len(batch)
                adam_step(params, grad_sum, state, config)
            train_loss = loss_sum / n
            val = evaluate(val_pairs, model, lib)
            history.append(EpochMetrics(epoch, train_loss, val.accuracy))
            if metrics_fh:
                metrics_fh.write(f"{epoch}\t{train_loss:.10f}\t{val.accuracy:.6f}\n")
                metrics_fh.flush()
            if verbose:
                log.info("epoch %d: train_loss=%.6f val_acc=%.4f", epoch, train_loss, val.accuracy)
            if val.accuracy > best_acc:
                best_acc = val.accuracy
                best_epoch = epoch
                best_model = model.copy()
            if (
                config.target_val_accuracy is not None
                and val.accuracy >= config.target_val_accuracy
            ):
                break
    finally:
        if metrics_fh:
            metrics_fh.close()
    return TrainResult(
        best_model=best_model,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
        history=history,
    )
