"""Pull-based frame sources.

A source is a single-consumer iterator of Frames sharing one profile;
exhausted sources keep raising StopIteration. Directory sources read PNG
files in lexicographic order (which is defined to be temporal order).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import FrameShapeError
from .frames import Frame
from .profiles import SensorProfile
from .seqfile import read_header, read_frame


class FrameSource:
    """Iterator contract shared by all sources."""

    profile: SensorProfile

    def __iter__(self):
        return self

    def __next__(self) -> Frame:
        raise NotImplementedError

    def take(self, n):
        out = []
        for frame in self:
            out.append(frame)
            if len(out) == n:
                break
        return out


def load_png_frame(path, profile, device_serial=None) -> Frame:
    img = Image.open(path)
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape != profile.frame_shape:
        raise FrameShapeError(
            f"{path}: image shape {arr.shape} does not match profile "
            f"{profile.name!r} ({profile.frame_shape})"
        )
    return Frame(arr, profile, device_serial=device_serial)


def save_png_frame(path, frame: Frame):
    pixels = frame.pixels
    if pixels.shape[2] == 1:
        pixels = pixels[:, :, 0]
    # compress_level 1: these are high-entropy sensor images, speed wins
    Image.fromarray(pixels).save(path, format="PNG", compress_level=1)


class ImageDirectorySource(FrameSource):
    """PNG files in a directory, lexicographic order."""

    def __init__(self, directory, profile, device_serial=None):
        self.profile = profile
        self.device_serial = device_serial
        self._paths = sorted(Path(directory).glob("*.png"))
        self._pos = 0

    def __next__(self):
        if self._pos >= len(self._paths):
            raise StopIteration
        path = self._paths[self._pos]
        self._pos += 1
        return load_png_frame(path, self.profile, self.device_serial)


class SequenceFileSource(FrameSource):
    """Frames from one TKSEQ1 container."""

    def __init__(self, path, device_serial=None):
        self.path = Path(path)
        self.device_serial = device_serial
        self.profile, self._count, self.fps, _ = read_header(self.path)
        self._pos = 0

    def __next__(self):
        if self._pos >= self._count:
            raise StopIteration
        frame = read_frame(self.path, self._pos, self.device_serial)
        self._pos += 1
        return frame
