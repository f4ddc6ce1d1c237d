import numpy as np
import pytest

from helpers import random_library
from maxcosine.embeddings import cosine
from maxcosine.matching import (
    EmptySentenceError,
    build_augmented_sequence,
    match_fast,
    match_word,
)
from maxcosine.numerics import make_rng


def naive_match(query, candidates):
    """Independent brute-force argmax-of-cosine oracle."""
    best, best_sim = 0, float("-inf")
    for i, cand in enumerate(candidates):
        sim = cosine(np.asarray(query, float), np.asarray(cand, float))
        if sim > best_sim:
            best, best_sim = i, sim
    return best


class TestMatchWord:
    def test_basic(self):
        assert match_word(np.array([0.9, 0.1]), [np.array([1.0, 0.0]), np.array([0.0, 1.0])]) == 0

    def test_tie_break_smallest_index(self):
        cands = [np.array([1.0, 1.0]), np.array([1.0, 1.0])]
        assert match_word(np.array([0.3, 0.3]), cands) == 0

    def test_scale_invariance_of_query(self):
        cands = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        assert match_word(np.array([9.0, 1.0]), cands) == match_word(
            np.array([0.9, 0.1]), cands
        )

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            match_word(np.array([1.0]), [])


class TestMatchFast:
    def test_agrees_with_match_word_on_random_instances(self):
        rng = make_rng(11)
        for _ in range(200):
            n, d = int(rng.integers(1, 9)), int(rng.integers(2, 6))
            rows = rng.standard_normal((n, d))
            q = rng.standard_normal(d)
            norms = np.linalg.norm(rows, axis=1)
            assert match_fast(q, rows, norms) == match_word(q, list(rows))

    def test_single_candidate(self):
        rows = np.array([[0.5, 0.5]])
        assert match_fast(np.array([1.0, 0.0]), rows, np.linalg.norm(rows, axis=1)) == 0

    def test_zero_norm_candidate_loses_to_positive_similarity(self):
        rows = np.array([[0.0, 0.0], [1.0, 0.5]])
        assert match_fast(np.array([1.0, 0.0]), rows, np.linalg.norm(rows, axis=1)) == 1

    def test_zero_norm_candidate_beats_negative_similarity(self):
        # similarity 0 (the zero-vector convention) outranks a negative cosine,
        # keeping match_fast consistent with argmax over match_word's values
        rows = np.array([[0.0, 0.0], [-1.0, 0.0]])
        norms = np.linalg.norm(rows, axis=1)
        q = np.array([1.0, 0.0])
        assert match_fast(q, rows, norms) == match_word(q, list(rows)) == 0

    def test_all_zero_candidates(self):
        rows = np.zeros((3, 2))
        assert match_fast(np.array([1.0, 0.0]), rows, np.zeros(3)) == 0

    def test_zero_query(self):
        rows = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert match_fast(np.zeros(2), rows, np.linalg.norm(rows, axis=1)) == 0


class TestAugmentedSequence:
    def test_shapes(self):
        rng = make_rng(1)
        lib = random_library(rng, n_words=10, dim=7)
        seq = build_augmented_sequence(["w0", "w1", "w2", "w3"], ["w4", "w5"], lib)
        assert len(seq) == 4
        assert seq.step_dim == 14
        assert seq.vectors().shape == (4, 14)
        assert all(0 <= i < 2 for i in seq.matched_indices)

    def test_identical_sentences_match_self(self):
        rng = make_rng(2)
        lib = random_library(rng, n_words=12, dim=6)
        tokens = ["w0", "w1", "w2", "w3", "w4"]
        seq = build_augmented_sequence(tokens, tokens, lib)
        for t, idx in enumerate(seq.matched_indices):
            matched_sim = cosine(lib.vector(tokens[t]), lib.vector(tokens[idx]))
            assert matched_sim == pytest.approx(1.0, abs=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = make_rng(3)
        lib = random_library(rng, n_words=16, dim=5)
        words = lib.words()
        for _ in range(50):
            cond = [str(w) for w in rng.choice(words, size=int(rng.integers(2, 7)))]
            against = [str(w) for w in rng.choice(words, size=int(rng.integers(2, 7)))]
            seq = build_augmented_sequence(cond, against, lib)
            expected = [
                naive_match(lib.vector(c), [lib.vector(x) for x in against]) for c in cond
            ]
            assert seq.matched_indices == expected

    def test_empty_sides_rejected(self):
        rng = make_rng(4)
        lib = random_library(rng, n_words=4, dim=3)
        with pytest.raises(EmptySentenceError):
            build_augmented_sequence([], ["w0"], lib)
        with pytest.raises(EmptySentenceError):
            build_augmented_sequence(["w0"], [], lib)

    def test_argmax_invariant_under_global_scaling(self):
        rng = make_rng(5)
        lib = random_library(rng, n_words=14, dim=6)
        scaled = lib.scaled(2.0)
        words = lib.words()
        for _ in range(30):
            cond = [str(w) for w in rng.choice(words, size=4)]
            against = [str(w) for w in rng.choice(words, size=5)]
            a = build_augmented_sequence(cond, against, lib).matched_indices
            b = build_augmented_sequence(cond, against, scaled).matched_indices
            assert a == b

    def test_directions_are_independent(self):
        rng = make_rng(6)
        lib = random_library(rng, n_words=10, dim=4)
        y = ["w0", "w1", "w2"]
        x = ["w3", "w4", "w5", "w6"]
        assert len(build_augmented_sequence(y, x, lib)) == 3
        assert len(build_augmented_sequence(x, y, lib)) == 4
