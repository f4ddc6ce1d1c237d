"""MaxCosine-LSTM: textual entailment via max-cosine word matching and an LSTM encoder."""

__version__ = "0.1.0"

from .data import SentencePair, tokenize, load_snli
from .embeddings import (
    EmbeddingLibrary,
    WordVector,
    VectorSource,
    cosine,
    concat_libraries,
    load_text_format,
    load_binary_format,
    lookup_with_oov,
)
from .matching import AugmentedSequence, build_augmented_sequence, match_word, match_fast
from .model import Model, ModelConfig, init_model, forward, decide
from .training import TrainConfig, train, evaluate, cross_entropy
from .ensemble import Ensemble, train_ensemble, predict_ensemble
