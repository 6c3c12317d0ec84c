"""Sensor profiles, frame sources and preprocessing."""

from .frames import Frame
from .preprocess import (
    acquire_reference,
    preprocess,
    resize_area,
    to_grayscale,
)
from .profiles import (
    DIGIT,
    GELSIGHT,
    OMNITACT,
    PreprocessSpec,
    SensorProfile,
    ensure_profile,
    lookup_profile,
    mono_variant,
    register_profile,
    registered_profiles,
)
from .seqfile import DEFAULT_FPS, read_frames, write_sequence
from .sources import (
    FrameSource,
    ImageDirectorySource,
    SequenceFileSource,
    load_png_frame,
    save_png_frame,
)

__all__ = [
    "DEFAULT_FPS",
    "DIGIT",
    "Frame",
    "FrameSource",
    "GELSIGHT",
    "ImageDirectorySource",
    "OMNITACT",
    "PreprocessSpec",
    "SensorProfile",
    "SequenceFileSource",
    "acquire_reference",
    "ensure_profile",
    "load_png_frame",
    "lookup_profile",
    "mono_variant",
    "preprocess",
    "read_frames",
    "register_profile",
    "registered_profiles",
    "resize_area",
    "save_png_frame",
    "to_grayscale",
    "write_sequence",
]
