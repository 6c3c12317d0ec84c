"""Standard network definitions used by the task modules.

The default classifier is a compact residual network: a 3x3 stem into
three residual stages of (16, 32, 64) channels with two blocks each and
stride-2 downsampling between stages, finished by global average pooling
and a fully connected head.  A full-depth ImageNet-style variant remains
expressible through NetworkSpec for callers that want it.
"""

from __future__ import annotations

from ..errors import UnsupportedConfigurationError
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
from .network import NetworkSpec

MIN_VOLUME_FRAMES = 16


def resnet_lite_2d(in_channels, num_classes, input_hw=(64, 64)):
    layers = [
        Conv2D(in_channels, 16),
        BatchNorm(16),
        ReLU(),
        ResidualBlock2D(16, 16),
        ResidualBlock2D(16, 16),
        ResidualBlock2D(16, 32, stride=2),
        ResidualBlock2D(32, 32),
        ResidualBlock2D(32, 64, stride=2),
        ResidualBlock2D(64, 64),
        GlobalAvgPool(),
        FullyConnected(64, num_classes),
    ]
    return NetworkSpec(layers, (in_channels, *input_hw), num_classes)


def resnet_lite_3d(in_channels, num_classes, input_dhw):
    """3D variant: temporal stride 1 in stage 1, temporal stride 2 after.

    With two temporal downsamplings the input needs at least
    MIN_VOLUME_FRAMES frames to keep a usable temporal extent.
    """
    frames = input_dhw[0]
    if frames < MIN_VOLUME_FRAMES:
        raise UnsupportedConfigurationError(
            f"3D convolutional networks need windows of at least "
            f"{MIN_VOLUME_FRAMES} frames, got {frames}"
        )
    layers = [
        Conv3D(in_channels, 16),
        BatchNorm(16),
        ReLU(),
        ResidualBlock3D(16, 16),
        ResidualBlock3D(16, 16),
        ResidualBlock3D(16, 32, stride=(2, 2, 2)),
        ResidualBlock3D(32, 32),
        ResidualBlock3D(32, 64, stride=(2, 2, 2)),
        ResidualBlock3D(64, 64),
        GlobalAvgPool(),
        FullyConnected(64, num_classes),
    ]
    return NetworkSpec(layers, (in_channels, *input_dhw), num_classes)


def resnet18_2d(in_channels, num_classes, input_hw=(224, 224)):
    """Full-depth variant: 7x7 stem, max pool, four stages of two blocks."""
    layers = [
        Conv2D(in_channels, 64, kernel=7, stride=2, padding=3),
        BatchNorm(64),
        ReLU(),
        MaxPool(kernel=3, stride=2, padding=1),
        ResidualBlock2D(64, 64),
        ResidualBlock2D(64, 64),
        ResidualBlock2D(64, 128, stride=2),
        ResidualBlock2D(128, 128),
        ResidualBlock2D(128, 256, stride=2),
        ResidualBlock2D(256, 256),
        ResidualBlock2D(256, 512, stride=2),
        ResidualBlock2D(512, 512),
        GlobalAvgPool(),
        FullyConnected(512, num_classes),
    ]
    return NetworkSpec(layers, (in_channels, *input_hw), num_classes)
