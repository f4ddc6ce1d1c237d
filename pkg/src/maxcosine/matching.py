"""Max-cosine word matching and construction of the augmented pair sequence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import (
    DEFAULT_OOV_WINDOW,
    EmbeddingLibrary,
    WordVector,
    cosine,
    lookup_with_oov,
)


class EmptySentenceError(ValueError):
    """A sentence tokenized to nothing; the pair should be skipped upstream."""


@dataclass(frozen=True)
class AugmentedStep:
    own: WordVector
    matched: WordVector
    matched_index: int


@dataclass
class AugmentedSequence:
    steps: list[AugmentedStep]
    matched_indices: list[int]
    step_dim: int

    def __len__(self) -> int:
        return len(self.steps)

    def vectors(self) -> np.ndarray:
        """(m, step_dim) matrix of concatenated (own || matched) step vectors."""
        return np.stack(
            [np.concatenate([s.own.values, s.matched.values]) for s in self.steps]
        )


def _values(v) -> np.ndarray:
    return v.values if isinstance(v, WordVector) else np.asarray(v, dtype=np.float64)


def match_word(query, candidates: Sequence) -> int:
    """Index of the candidate with the highest cosine similarity to query.

    Ties break toward the smallest index.
    """
    if len(candidates) == 0:
        raise ValueError("empty candidate list")
    q = _values(query)
    best, best_sim = 0, -np.inf
    for i, cand in enumerate(candidates):
        sim = cosine(q, _values(cand))
        if sim > best_sim:
            best, best_sim = i, sim
    return best


def match_fast(query, rows: np.ndarray, norms: np.ndarray) -> int:
    """Same result as match_word, using precomputed candidate norms and one matvec."""
    if rows.shape[0] == 0:
        raise ValueError("empty candidate list")
    q = _values(query)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        return 0
    sims = np.zeros(rows.shape[0], dtype=np.float64)
    nonzero = norms != 0.0
    sims[nonzero] = (rows[nonzero] @ q) / (norms[nonzero] * qn)
    return int(np.argmax(sims))


def build_augmented_sequence(
    conditioned: Sequence[str],
    conditioning: Sequence[str],
    lib: EmbeddingLibrary,
    window: int = DEFAULT_OOV_WINDOW,
) -> AugmentedSequence:
    """For each token of `conditioned`, pair its vector with the most cosine-similar
    token vector of `conditioning`."""
    if len(conditioned) == 0 or len(conditioning) == 0:
        raise EmptySentenceError("cannot match against an empty sentence")
    cand = [lookup_with_oov(lib, conditioning, s, window) for s in range(len(conditioning))]
    rows = np.stack([c.values for c in cand])
    norms = np.linalg.norm(rows, axis=1)
    steps = []
    for t in range(len(conditioned)):
        own = lookup_with_oov(lib, conditioned, t, window)
        idx = match_fast(own, rows, norms)
        steps.append(AugmentedStep(own=own, matched=cand[idx], matched_index=idx))
    return AugmentedSequence(
        steps=steps,
        matched_indices=[s.matched_index for s in steps],
        step_dim=2 * lib.dim,
    )
