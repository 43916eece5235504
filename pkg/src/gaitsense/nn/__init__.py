"""From-scratch CNN-BiLSTM-attention network with hand-derived gradients."""

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
from .model import Model, ModelConfig, load_model, save_model
from .train import Adam, ConfusionMatrix, TrainConfig, evaluate, train

__all__ = [
    "AdditiveAttention", "BatchNorm1D", "BiLSTM", "Conv1D", "Dense",
    "Dropout", "MaxPool1D", "ReLU", "cross_entropy", "softmax",
    "Model", "ModelConfig", "load_model", "save_model",
    "Adam", "ConfusionMatrix", "TrainConfig", "evaluate", "train",
]
