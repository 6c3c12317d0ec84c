"""Raw frames as they come off a sensor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FrameShapeError
from .profiles import SensorProfile


@dataclass
class Frame:
    """One 8-bit image tied to the profile that produced it."""

    pixels: np.ndarray  # (height, width, channels) uint8
    sensor: SensorProfile
    timestamp_ms: float | None = None
    device_serial: str | None = None

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.dtype != np.uint8:
            raise FrameShapeError(
                f"frame pixels must be uint8, got {self.pixels.dtype}"
            )
        if self.pixels.ndim == 2:
            self.pixels = self.pixels[:, :, None]
        if self.pixels.shape != self.sensor.frame_shape:
            raise FrameShapeError(
                f"frame shape {self.pixels.shape} does not match profile "
                f"{self.sensor.name!r} ({self.sensor.frame_shape})"
            )

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return self.pixels.shape[2]
