"""From raw frames to model-ready tensors.

Downsampling is area-averaging: every output pixel is the weighted mean of
the source rectangle it covers, so the image mean is preserved exactly and
no aspect ratio is kept (the full frame resamples to the square target).
Normalization is (pixel/255 - mean) / std per channel; with reference
concatenation the live frame occupies channels [0, C) and the reference
channels [C, 2C), both normalized with the same per-channel statistics.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import (
    FrameShapeError,
    MissingReferenceError,
    ProfileMismatchError,
    SourceExhaustedError,
)
from .frames import Frame
from .profiles import PreprocessSpec, mono_variant

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@lru_cache(maxsize=64)
def _overlap_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) matrix of box-overlap weights; rows sum to 1."""
    w = np.zeros((dst, src), dtype=np.float32)
    scale = src / dst
    for i in range(dst):
        lo = i * scale
        hi = (i + 1) * scale
        j0 = int(np.floor(lo))
        j1 = min(int(np.ceil(hi)), src)
        for j in range(j0, j1):
            w[i, j] = min(hi, j + 1) - max(lo, j)
    w /= w.sum(axis=1, keepdims=True)
    return w


def resize_area(image: np.ndarray, target_size: tuple) -> np.ndarray:
    """Area-average resample of an (H, W, C) image to (th, tw, C) float32."""
    th, tw = target_size
    img = np.asarray(image, dtype=np.float32)
    if img.shape[:2] == (th, tw):
        return img.copy()
    rh = _overlap_weights(img.shape[0], th)
    rw = _overlap_weights(img.shape[1], tw)
    out = np.tensordot(rh, img, axes=(1, 0))          # (th, W, C)
    out = np.tensordot(out, rw, axes=(1, 1))           # (th, C, tw)
    return np.ascontiguousarray(np.moveaxis(out, 1, 2))


def to_grayscale(frame: Frame) -> Frame:
    """Collapse RGB to luminance (0.299 R + 0.587 G + 0.114 B, rounded)."""
    if frame.channels != 3:
        raise FrameShapeError("frame is already single-channel")
    luma = (
        LUMA_WEIGHTS[0] * frame.pixels[:, :, 0].astype(np.float64)
        + LUMA_WEIGHTS[1] * frame.pixels[:, :, 1]
        + LUMA_WEIGHTS[2] * frame.pixels[:, :, 2]
    )
    pixels = np.clip(np.rint(luma), 0, 255).astype(np.uint8)[:, :, None]
    return Frame(
        pixels,
        mono_variant(frame.sensor),
        timestamp_ms=frame.timestamp_ms,
        device_serial=frame.device_serial,
    )


def _prepared(frame: Frame, spec: PreprocessSpec) -> np.ndarray:
    if spec.grayscale and frame.channels == 3:
        frame = to_grayscale(frame)
    resized = resize_area(frame.pixels, spec.target_size)
    if resized.shape[2] != len(spec.mean):
        raise FrameShapeError(
            f"normalization has {len(spec.mean)} channels, frame has "
            f"{resized.shape[2]}"
        )
    mean = np.asarray(spec.mean, dtype=np.float32)
    std = np.asarray(spec.std, dtype=np.float32)
    out = (resized / np.float32(255.0) - mean) / std
    return np.ascontiguousarray(np.moveaxis(out, 2, 0))  # (C, th, tw)


def preprocess(frame: Frame, spec: PreprocessSpec, reference: Frame | None = None):
    """Produce the (C', target_h, target_w) float32 tensor for one frame."""
    if spec.concat_reference:
        if reference is None:
            raise MissingReferenceError(
                "preprocessing spec requires a reference frame"
            )
        if reference.sensor.name != frame.sensor.name:
            raise ProfileMismatchError(
                f"reference profile {reference.sensor.name!r} does not match "
                f"frame profile {frame.sensor.name!r}"
            )
        return np.concatenate(
            [_prepared(frame, spec), _prepared(reference, spec)], axis=0
        )
    return _prepared(frame, spec)


def acquire_reference(source, n: int = 8) -> Frame:
    """Per-pixel mean of the first n frames, rounded to 8 bits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = None
    first = None
    got = 0
    for frame in source:
        if first is None:
            first = frame
            total = np.zeros(frame.pixels.shape, dtype=np.float64)
        total += frame.pixels
        got += 1
        if got == n:
            break
    if got < n:
        raise SourceExhaustedError(
            f"needed {n} frames for the reference, source yielded {got}"
        )
    pixels = np.clip(np.rint(total / n), 0, 255).astype(np.uint8)
    return Frame(pixels, first.sensor, device_serial=first.device_serial)
