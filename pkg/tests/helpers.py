"""Shared builders for synthetic libraries and sentence pairs."""

from maxcosine.data import SentencePair
from maxcosine.embeddings import EmbeddingLibrary


def random_library(rng, n_words=24, dim=8):
    words = [f"w{i}" for i in range(n_words)]
    return EmbeddingLibrary(
        {w: i for i, w in enumerate(words)}, rng.standard_normal((n_words, dim))
    )


def random_pairs(rng, lib, n, min_len=3, max_len=6):
    words = lib.words()
    out = []
    for i in range(n):
        prem = tuple(str(w) for w in rng.choice(words, size=int(rng.integers(min_len, max_len + 1))))
        hyp = tuple(str(w) for w in rng.choice(words, size=int(rng.integers(min_len, max_len + 1))))
        out.append(SentencePair(prem, hyp, label=int(rng.integers(1, 4)), id=i))
    return out
