"""Minimal autodiff engine and GNN node classifiers."""

from .autodiff import Tensor, backward, parameter
from .models import ARCHS, ModelConfig, build_model, gcn_propagation
from .train import TrainReport, train

__all__ = [
    "ARCHS",
    "ModelConfig",
    "Tensor",
    "TrainReport",
    "backward",
    "build_model",
    "gcn_propagation",
    "parameter",
    "train",
]
