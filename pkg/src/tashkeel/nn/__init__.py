"""Sequence-labelling engine: biLSTM model, Adamax, early-stopping trainer."""

from .kernels import BACKEND
from .model import ModelConfig, SequenceModel, forward, loss_and_gradients, pad_batch, predict
from .optim import AdamaxState, adamax_step
from .train import EarlyStopping, TrainConfig, accuracy, predict_all, train

__all__ = [
    "BACKEND", "ModelConfig", "SequenceModel", "forward", "loss_and_gradients", "pad_batch", "predict",
    "AdamaxState", "adamax_step", "EarlyStopping", "TrainConfig", "accuracy", "predict_all", "train",
]
