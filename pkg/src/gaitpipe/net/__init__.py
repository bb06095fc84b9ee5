from .layers import (
    BatchNorm,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool2x2,
    Param,
    ReLU,
)
from .model import GROUP_OUTPUT_SHAPES, Network, build_network
from .serialize import TrainedModel, load_model, save_model
from .training import TrainingConfig, mse_loss_and_grad, predict, rmse, train

__all__ = [
    "BatchNorm",
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "GROUP_OUTPUT_SHAPES",
    "MaxPool2x2",
    "Network",
    "Param",
    "ReLU",
    "TrainedModel",
    "TrainingConfig",
    "build_network",
    "load_model",
    "mse_loss_and_grad",
    "predict",
    "rmse",
    "save_model",
    "train",
]
