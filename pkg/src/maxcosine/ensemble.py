"""Seed ensembles: homogeneous members trained from distinct seeds, predictions
averaged in probability space."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .data import SentencePair
from .embeddings import EmbeddingLibrary
from .model import Model, forward
from .training import TrainConfig, TrainResult, train

DEFAULT_SIZE = 5


@dataclass
class Ensemble:
    members: list[Model]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        ref = dataclasses.replace(self.members[0].config, seed=0)
        for m in self.members[1:]:
            if dataclasses.replace(m.config, seed=0) != ref:
                raise ValueError("ensemble members must share a config (only seeds differ)")

    def __len__(self) -> int:
        return len(self.members)


def train_ensemble(
    config: TrainConfig,
    seeds: Sequence[int],
    train_pairs: Sequence[SentencePair],
    val_pairs: Sequence[SentencePair],
    lib: EmbeddingLibrary,
    workers: int = 1,
    metrics_dir=None,
) -> tuple[Ensemble, list[TrainResult]]:
    """One independent training run per seed; each member is fully determined by
    its seed, so runs may execute in parallel without changing the result."""
    if len(set(seeds)) != len(seeds):
        raise ValueError("ensemble seeds must be pairwise distinct")
    jobs = [
        (dataclasses.replace(config, seed=s), train_pairs, val_pairs, lib,
         str(Path(metrics_dir) / f"metrics_seed{s}.tsv") if metrics_dir else None)
        for s in seeds
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_member, jobs))
    else:
        results = [_train_member(job) for job in jobs]
    return Ensemble(members=[r.best_model for r in results]), results


def _train_member(job) -> TrainResult:
    member_config, train_pairs, val_pairs, lib, metrics_path = job
    return train(train_pairs, val_pairs, member_config, lib, metrics_path=metrics_path)


def predict_ensemble(
    ensemble: Ensemble, pair: SentencePair, lib: EmbeddingLibrary
) -> tuple[np.ndarray, int]:
    """Arithmetic mean of member probabilities; label with smallest-index tie-break.

    Each coordinate is summed in sorted order with extended precision, so the
    mean is independent of member order and reduces exactly to the member
    output when all members agree bitwise.
    """
    member_probs = [forward(m, pair, lib, train=False)[0] for m in ensemble.members]
    n = len(member_probs)
    mean = np.empty(3)
    for j in range(3):
        total = np.longdouble(0.0)
        for v in sorted(p[j] for p in member_probs):
            total += v
        mean[j] = float(total / n)
    return mean, int(np.argmax(mean)) + 1


def save_manifest(path, member_paths: Sequence[str], seeds: Sequence[int]) -> None:
    manifest = {
        "members": [{"checkpoint": str(p), "seed": int(s)} for p, s in zip(member_paths, seeds)]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_ensemble(manifest_path) -> Ensemble:
    base = Path(manifest_path).parent
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    members = []
    for entry in manifest["members"]:
        ckpt = Path(entry["checkpoint"])
        if not ckpt.is_absolute():
            ckpt = base / ckpt
        members.append(load_checkpoint(ckpt))
    return Ensemble(members=members)


def save_ensemble(ensemble: Ensemble, out_dir, seeds: Optional[Sequence[int]] = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if seeds is None:
        seeds = [m.config.seed for m in ensemble.members]
    paths = []
    for model, seed in zip(ensemble.members, seeds):
        p = out / f"member_seed{seed}.ckpt"
        save_checkpoint(p, model)
        paths.append(p.name)
    manifest = out / "ensemble.json"
    save_manifest(manifest, paths, seeds)
    return manifest
