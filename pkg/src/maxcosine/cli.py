"""Command-line entry point: train, eval, predict, match, ensemble-train,
gradcheck, embed-convert."""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from . import ensemble as ens
from .data import LABEL_NAMES, SentencePair, load_snli, tokenize
from .embeddings import (
    EmbeddingLibrary,
    concat_libraries,
    cosine,
    load_binary_format,
    load_text_format,
    save_binary_format,
    save_text_format,
)
from .gradcheck import model_gradient_check
from .matching import build_augmented_sequence
from .model import forward, init_model
from .numerics import make_rng
from .training import TrainConfig, evaluate, train

log = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-5

# every accepted config-file key and its type
CONFIG_SCHEMA: dict[str, type] = {
    "learning_rate": float,
    "beta1": float,
    "beta2": float,
    "epsilon": float,
    "batch_size": int,
    "epochs": int,
    "dropout_rate": float,
    "seed": int,
    "k": int,
    "biway": bool,
    "bi_embedding": bool,
    "oov_window": int,
    "train_path": str,
    "val_path": str,
    "embeddings": str,
    "embeddings2": str,
    "embedding_format": str,
    "out_dir": str,
    "workers": int,
    "seeds": str,
    "max_train_pairs": int,
    "max_val_pairs": int,
}

TRAIN_CONFIG_KEYS = {
    "learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs",
    "dropout_rate", "seed", "k", "biway", "bi_embedding", "oov_window",
}


class CliError(Exception):
    pass


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise CliError(f"not a boolean: {value!r}")


def _coerce(key: str, value: str):
    if key not in CONFIG_SCHEMA:
        raise CliError(f"unknown config key: {key!r}")
    ty = CONFIG_SCHEMA[key]
    if ty is bool:
        return _parse_bool(value)
    try:
        return ty(value)
    except ValueError:
        raise CliError(f"bad value for {key}: {value!r}") from None


def read_config_file(path) -> dict:
    """Plain `key=value` lines; `#` starts a comment; unknown keys are errors."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise CliError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, value = stripped.split("=", 1)
            out[key.strip()] = _coerce(key.strip(), value.strip())
    return out


def resolve_config(args) -> dict:
    """Config-file values overridden by any flags that were actually passed."""
    cfg = dict(read_config_file(args.config)) if getattr(args, "config", None) else {}
    for key in CONFIG_SCHEMA:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            cfg[key] = flag_value
    if "seed" not in cfg and os.environ.get("MAXCOSINE_SEED"):
        cfg["seed"] = int(os.environ["MAXCOSINE_SEED"])
    return cfg


def build_train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(**{k: v for k, v in cfg.items() if k in TRAIN_CONFIG_KEYS})


def _detect_format(path) -> str:
    with open(path, "rb") as fh:
        first = fh.readline(128)
    return "binary" if re.fullmatch(rb"\d+ \d+\n?", first) else "text"


def load_library(path, fmt: str = "auto") -> EmbeddingLibrary:
    if fmt == "auto":
        fmt = _detect_format(path)
    if fmt == "binary":
        return load_binary_format(path)
    if fmt == "text":
        return load_text_format(path)
    raise CliError(f"unknown embedding format {fmt!r}")


def load_libraries(cfg: dict) -> EmbeddingLibrary:
    if "embeddings" not in cfg:
        raise CliError("no embeddings path given (embeddings=... or --embeddings)")
    fmt = cfg.get("embedding_format", "auto")
    lib = load_library(cfg["embeddings"], fmt)
    if cfg.get("bi_embedding") and "embeddings2" not in cfg:
        raise CliError("bi_embedding=true requires a second library (embeddings2)")
    if "embeddings2" in cfg:
        lib = concat_libraries(lib, load_library(cfg["embeddings2"], fmt))
    return lib


def _load_pairs(path, max_pairs=None) -> list[SentencePair]:
    pairs, report = load_snli(path, max_pairs=max_pairs)
    log.info(
        "%s: %d pairs (%d unknown-label, %d empty-tokenization, %d malformed skipped)",
        path, report.emitted, report.skipped_unknown_label,
        report.skipped_empty_tokenization, report.malformed,
    )
    if not pairs:
        raise CliError(f"{path}: no usable pairs")
    return pairs


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    for required in ("train_path", "val_path", "out_dir"):
        if required not in cfg:
            raise CliError(f"missing required setting {required}")
    lib = load_libraries(cfg)
    train_pairs = _load_pairs(cfg["train_path"], cfg.get("max_train_pairs"))
    val_pairs = _load_pairs(cfg["val_path"], cfg.get("max_val_pairs"))
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    result = train(
        train_pairs, val_pairs, build_train_config(cfg), lib,
        metrics_path=out_dir / "metrics.tsv", verbose=True,
    )
    ckpt.save_checkpoint(out_dir / "model.ckpt", result.best_model)
    print(f"best epoch {result.best_epoch}: val_accuracy={result.best_val_accuracy:.4f}")
    print(f"checkpoint: {out_dir / 'model.ckpt'}")
    return 0


def _is_manifest(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(1) == b"{"
    except OSError:
        return False


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    lib = load_libraries(cfg)
    pairs = _load_pairs(args.dataset)
    if _is_manifest(args.checkpoint):
        group = ens.load_ensemble(args.checkpoint)
        confusion = np.zeros((3, 3), dtype=np.int64)
        if lib.dim != group.members[0].config.embedding_dim:
            raise CliError(
                f"library dimension {lib.dim} != checkpoint embedding_dim "
                f"{group.members[0].config.embedding_dim}"
            )
        for pair in pairs:
            _, label = ens.predict_ensemble(group, pair, lib)
            confusion[pair.label - 1, label - 1] += 1
        accuracy = float(np.trace(confusion)) / len(pairs)
    else:
        model = ckpt.load_checkpoint(args.checkpoint)
        if lib.dim != model.config.embedding_dim:
            raise CliError(
                f"library dimension {lib.dim} != checkpoint embedding_dim "
                f"{model.config.embedding_dim}"
            )
        result = evaluate(pairs, model, lib)
        confusion, accuracy = result.confusion, result.accuracy
    print(f"accuracy: {accuracy:.4f} ({int(np.trace(confusion))}/{len(pairs)})")
    print("confusion (rows gold, cols predicted; E C N):")
    for row_label, row in zip("ECN", confusion):
        print(f"  {row_label}  " + " ".join(f"{v:7d}" for v in row))
    return 0


def cmd_predict(args) -> int:
    cfg = resolve_config(args)
    lib = load_libraries(cfg)
    model = ckpt.load_checkpoint(args.checkpoint)
    if lib.dim != model.config.embedding_dim:
        raise CliError(
            f"library dimension {lib.dim} != checkpoint embedding_dim "
            f"{model.config.embedding_dim}"
        )
    prem = tokenize(args.premise)
    hyp = tokenize(args.hypothesis)
    if not prem or not hyp:
        raise CliError("premise and hypothesis must tokenize to at least one token")
    pair = SentencePair(tuple(prem), tuple(hyp), label=1, id=0)
    probs, _ = forward(model, pair, lib, train=False)
    label = int(np.argmax(probs)) + 1
    for i, name in LABEL_NAMES.items():
        print(f"{name}: {probs[i - 1]:.6f}")
    print(f"label: {LABEL_NAMES[label]}")
    return 0


def cmd_match(args) -> int:
    cfg = resolve_config(args)
    lib = load_libraries(cfg)
    prem = tokenize(args.premise)
    hyp = tokenize(args.hypothesis)
    if not prem or not hyp:
        raise CliError("premise and hypothesis must tokenize to at least one token")
    seq = build_augmented_sequence(hyp, prem, lib, window=cfg.get("oov_window", 4))
    for t, step in enumerate(seq.steps):
        sim = cosine(step.own.values, step.matched.values)
        print(f"{hyp[t]} -> {prem[step.matched_index]} ({sim:.4f})")
    return 0


def cmd_ensemble_train(args) -> int:
    cfg = resolve_config(args)
    for required in ("train_path", "val_path", "out_dir", "seeds"):
        if required not in cfg:
            raise CliError(f"missing required setting {required}")
    seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s.strip()]
    lib = load_libraries(cfg)
    train_pairs = _load_pairs(cfg["train_path"], cfg.get("max_train_pairs"))
    val_pairs = _load_pairs(cfg["val_path"], cfg.get("max_val_pairs"))
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    group, results = ens.train_ensemble(
        build_train_config(cfg), seeds, train_pairs, val_pairs, lib,
        workers=cfg.get("workers", 1), metrics_dir=out_dir if out_dir else None,
    )
    manifest = ens.save_ensemble(group, out_dir, seeds)
    for seed, result in zip(seeds, results):
        print(f"seed {seed}: best epoch {result.best_epoch}, "
              f"val_accuracy={result.best_val_accuracy:.4f}")
    print(f"manifest: {manifest}")
    return 0


def cmd_gradcheck(args) -> int:
    cfg = resolve_config(args)
    seed = cfg.get("seed", 0)
    rng = make_rng(seed)
    d, k = args.dim, args.k
    vocab = [f"w{i}" for i in range(24)]
    lib = EmbeddingLibrary(
        {w: i for i, w in enumerate(vocab)}, rng.standard_normal((len(vocab), d))
    )
    pairs = []
    for i in range(args.pairs):
        prem = tuple(rng.choice(vocab, size=rng.integers(3, 7)))
        hyp = tuple(rng.choice(vocab, size=rng.integers(3, 7)))
        pairs.append(SentencePair(prem, hyp, label=int(rng.integers(1, 4)), id=i))
    worst = 0.0
    for biway in (False, True):
        tc = TrainConfig(seed=seed, k=k, biway=biway, dropout_rate=0.0)
        model = init_model(tc.model_config(d), make_rng(seed))
        err = model_gradient_check(model, pairs, lib)
        worst = max(worst, err)
        print(f"{'biway' if biway else 'base '} max relative error: {err:.3e}")
    ok = worst < GRADCHECK_TOLERANCE
    print(f"gradcheck {'PASS' if ok else 'FAIL'} (tolerance {GRADCHECK_TOLERANCE:g})")
    return 0 if ok else 1


def cmd_embed_convert(args) -> int:
    lib = load_library(args.input, args.from_format)
    if args.to == "text":
        save_text_format(lib, args.output)
    else:
        save_binary_format(lib, args.output)
    print(f"wrote {len(lib)} vectors of dimension {lib.dim} to {args.output}")
    return 0


def _add_config_flags(p: argparse.ArgumentParser, keys=CONFIG_SCHEMA) -> None:
    p.add_argument("--config", help="key=value config file")
    for key in keys:
        ty = CONFIG_SCHEMA[key]
        flag = "--" + key.replace("_", "-")
        if ty is bool:
            p.add_argument(flag, type=_parse_bool, default=None, metavar="BOOL")
        else:
            p.add_argument(flag, type=ty, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxcosine")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model, write checkpoint and metrics")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint or ensemble manifest")
    p.add_argument("checkpoint")
    p.add_argument("dataset")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one premise/hypothesis pair")
    p.add_argument("checkpoint")
    p.add_argument("premise")
    p.add_argument("hypothesis")
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("match", help="show max-cosine word alignments")
    p.add_argument("premise")
    p.add_argument("hypothesis")
    _add_config_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("ensemble-train", help="train one member per seed")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ensemble_train)

    p = sub.add_parser("gradcheck", help="finite-difference check of the backward pass")
    p.add_argument("--dim", type=int, default=8, help="embedding dimension")
    p.add_argument("--k", type=int, default=12, help="hidden size")
    p.add_argument("--pairs", type=int, default=2, help="number of random pairs")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("embed-convert", help="convert embedding files text<->binary")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--to", choices=("text", "binary"), required=True)
    p.add_argument("--from-format", choices=("text", "binary", "auto"), default="auto")
    p.set_defaults(func=cmd_embed_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
