"""Desk-scale neural network core: layers, backprop, Adam, gradient oracle."""

from .builders import (
    MIN_VOLUME_FRAMES,
    resnet18_2d,
    resnet_lite_2d,
    resnet_lite_3d,
)
from .fitting import FitReport, evaluate_accuracy, fit_classifier, predict_logits
from .gradcheck import finite_difference_check
from .layers import (
    BatchNorm,
    Conv2D,
    Conv3D,
    FullyConnected,
    GlobalAvgPool,
    MaxPool,
    ReLU,
    ResidualBlock2D,
    ResidualBlock3D,
)
from .loss import cross_entropy, softmax
from .network import NetworkSpec, ParamLayer, Tape, cast_params, clone_params
from .optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "BatchNorm",
    "Conv2D",
    "Conv3D",
    "FitReport",
    "FullyConnected",
    "GlobalAvgPool",
    "MaxPool",
    "MIN_VOLUME_FRAMES",
    "NetworkSpec",
    "ParamLayer",
    "ReLU",
    "ResidualBlock2D",
    "ResidualBlock3D",
    "Tape",
    "adam_step",
    "cast_params",
    "clone_params",
    "cross_entropy",
    "evaluate_accuracy",
    "finite_difference_check",
    "fit_classifier",
    "predict_logits",
    "resnet18_2d",
    "resnet_lite_2d",
    "resnet_lite_3d",
    "softmax",
]
