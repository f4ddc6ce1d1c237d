"""Model checkpoint container.

Layout: 8-byte magic `MCLSTM\\x00\\x01`, an 8-byte little-endian header length,
a UTF-8 JSON header `{"config": {...}, "arrays": [{"name", "shape"}, ...]}`,
then each array's float64 row-major little-endian bytes in header order.
Round-trips are bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
import struct

import numpy as np

from .model import LstmParams, Model, ModelConfig, SoftmaxParams

MAGIC = b"MCLSTM\x00\x01"


class CheckpointError(ValueError):
    """Raised on unreadable or inconsistent checkpoint files."""


def save_checkpoint(path, model: Model) -> None:
    params = model.parameters()
    header = {
        "config": dataclasses.asdict(model.config),
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in params.items()],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for arr in params.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> Model:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path}: bad magic (not a checkpoint)")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        config = ModelConfig(**header["config"])
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            n = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * n)
            if len(raw) != 8 * n:
                raise CheckpointError(f"{path}: truncated array {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    def lstm(prefix: str) -> LstmParams:
        return LstmParams(**{f: arrays[f"{prefix}.{f}"] for f in
                             ("W_i", "W_f", "W_o", "W_c", "b_i", "b_f", "b_o", "b_c")})
    try:
        model = Model(
            config=config,
            lstm_h=lstm("lstm_h"),
            softmax_params=SoftmaxParams(W_s=arrays["softmax.W_s"], b_s=arrays["softmax.b_s"]),
            lstm_p=lstm("lstm_p") if config.biway else None,
        )
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing array {exc}") from None
    return model
