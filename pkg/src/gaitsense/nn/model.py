"""The CNN-BiLSTM-attention classifier: configuration, assembly, serialization.

Default geometry: length-220 single-channel input, two conv blocks
(64 then 16 filters, kernel 32, each batch-normalized and max-pooled),
two bidirectional LSTM blocks (32 units per direction) with dropout,
additive attention widening to 128, dense softmax head.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from .layers import (
    AdditiveAttention,
    BatchNorm1D,
    BiLSTM,
    Conv1D,
    Dense,
    Dropout,
    MaxPool1D,
    ReLU,
    cross_entropy,
    softmax,
)

__all__ = ["ModelConfig", "Model", "save_model", "load_model"]

_MAGIC = b"GSM1"


@dataclass(frozen=True)
class ModelConfig:
    input_len: int = 220
    conv_blocks: tuple = ((64, 32), (16, 32))
    lstm_hidden: int = 32
    lstm_layers: int = 2
    dropout: float = 0.3
    attention_hidden: int = 64
    n_classes: int = 8

    def to_dict(self) -> dict:
        return {
            "input_len": self.input_len,
            "conv_blocks": [list(b) for b in self.conv_blocks],
            "lstm_hidden": self.lstm_hidden,
            "lstm_layers": self.lstm_layers,
            "dropout": self.dropout,
            "attention_hidden": self.attention_hidden,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            input_len=d["input_len"],
            conv_blocks=tuple(tuple(b) for b in d["conv_blocks"]),
            lstm_hidden=d["lstm_hidden"],
            lstm_layers=d["lstm_layers"],
            dropout=d["dropout"],
            attention_hidden=d["attention_hidden"],
            n_classes=d["n_classes"],
        )


class Model:
    """Assembled network with named layers, seeded init and dropout."""

    def __init__(self, config: ModelConfig = ModelConfig(), seed: int = 0):
        self.config = config
        self.seed = seed
        init_ss, drop_ss = np.random.SeedSequence(seed).spawn(2)
        rng = np.random.Generator(np.random.PCG64(init_ss))
        self.dropout_rng = np.random.Generator(np.random.PCG64(drop_ss))

        self.named_layers: list[tuple[str, object]] = []
        c_in, t = 1, config.input_len
        for i, (filters, kernel) in enumerate(config.conv_blocks):
            self._add(f"conv_{i}", Conv1D(c_in, filters, kernel, rng))
            self._add(f"batchnorm_{i}", BatchNorm1D(filters))
            if i > 0:
                self._add(f"activation_{i}", ReLU())
            self._add(f"maxpool_{i}", MaxPool1D(2))
            c_in = filters
            t //= 2
        for i in range(config.lstm_layers):
            self._add(f"bilstm_{i}", BiLSTM(c_in, config.lstm_hidden, rng))
            c_in = 2 * config.lstm_hidden
            self._add(f"dropout_{i}", Dropout(config.dropout, self.dropout_rng))
        attn = AdditiveAttention(c_in, config.attention_hidden, rng)
        self._add("attention", attn)
        self._add("activation_out", ReLU())
        self._add("dense", Dense(attn.d_out, config.n_classes, rng))
        self.timesteps = t

    def _add(self, name, layer):
        self.named_layers.append((name, layer))

    @property
    def layers(self):
        return [l for _, l in self.named_layers]

    def layer(self, name):
        for n, l in self.named_layers:
            if n == name:
                return l
        raise KeyError(name)

    def param_counts(self) -> dict[str, int]:
        """Per-layer parameter counts (zero-parameter layers included)."""
        return {n: l.param_count() for n, l in self.named_layers}

    def total_params(self) -> int:
        return sum(self.param_counts().values())

    def forward(self, x: np.ndarray, training: bool = False,
                tap: str | None = None) -> np.ndarray:
        """Run the layer stack; with `tap`, return that layer's output instead."""
        if x.ndim != 3 or x.shape[1] != self.config.input_len or x.shape[2] != 1:
            raise ShapeError(
                f"expected [B, {self.config.input_len}, 1], got {x.shape}"
            )
        out = x
        for name, layer in self.named_layers:
            out = layer.forward(out, training=training)
            if tap is not None and name == tap:
                return out
        if tap is not None:
            raise KeyError(f"no layer named {tap}")
        return out

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        dout = dlogits
        for _, layer in reversed(self.named_layers):
            dout = layer.backward(dout)
        return dout

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x, training=False))

    def loss_and_grads(self, x: np.ndarray, labels: np.ndarray) -> float:
        """Forward + cross-entropy + full backward pass (training mode)."""
        self.zero_grads()
        logits = self.forward(x, training=True)
        loss, dlogits = cross_entropy(logits, labels)
        self.backward(dlogits)
        return loss

    def parameters(self):
        """Flat ordered list of (key, param array, grad array)."""
        out = []
        for name, layer in self.named_layers:
            for k in sorted(layer.params):
                out.append((f"{name}.{k}", layer.params[k], layer.grads[k]))
        return out

    def state_arrays(self):
        """Everything persisted: trainable params plus batch-norm statistics."""
        out = [(k, p) for k, p, _ in self.parameters()]
        for name, layer in self.named_layers:
            if isinstance(layer, BatchNorm1D):
                out.append((f"{name}.running_mean", layer.running_mean))
                out.append((f"{name}.running_var", layer.running_var))
        return out


def save_model(model: Model, path) -> None:
    """JSON header + flat little-endian float64 parameter block."""
    arrays = model.state_arrays()
    header = {
        "format": 1,
        "config": model.config.to_dict(),
        "seed": model.seed,
        "layout": [{"name": k, "shape": list(a.shape)} for k, a in arrays],
    }
    blob = json.dumps(header).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_model(path) -> Model:
    """Load and validate a model file written by :func:`save_model`."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a gaitsense model file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        model = Model(ModelConfig.from_dict(header["config"]), seed=header["seed"])
        arrays = model.state_arrays()
        if [e["name"] for e in header["layout"]] != [k for k, _ in arrays]:
            raise ValueError("model layout does not match its config")
        for entry, (k, a) in zip(header["layout"], arrays):
            if list(a.shape) != entry["shape"]:
                raise ValueError(f"shape mismatch for {k}")
            raw = fh.read(a.size * 8)
            if len(raw) != a.size * 8:
                raise ValueError("truncated parameter block")
            a[...] = np.frombuffer(raw, dtype="<f8").reshape(a.shape)
    return model
