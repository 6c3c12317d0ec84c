"""Sensor profiles and their registry.

A profile is a sensor's identity: native resolution, channel count,
whether reference (no-touch) frames are meaningful for it, and the default
preprocessing. The three supported commercial sensors are pre-registered;
custom hardware registers its own profile and then uses every other part
of the library unchanged.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from ..errors import DuplicateProfileError, UnknownProfileError


@dataclass(frozen=True)
class PreprocessSpec:
    """How raw frames become model inputs."""

    target_size: tuple = (64, 64)
    mean: tuple = (0.5, 0.5, 0.5)
    std: tuple = (0.5, 0.5, 0.5)
    concat_reference: bool = False
    grayscale: bool = False

    def __post_init__(self):
        object.__setattr__(self, "target_size", tuple(self.target_size))
        object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))
        object.__setattr__(self, "std", tuple(float(s) for s in self.std))
        if len(self.mean) != len(self.std):
            raise ValueError("mean and std must have the same length")
        if any(s <= 0 for s in self.std):
            raise ValueError("standard deviations must be strictly positive")
        if min(self.target_size) < 1:
            raise ValueError("target size must be positive")

    def to_json(self):
        return {
            "target_size": list(self.target_size),
            "mean": list(self.mean),
            "std": list(self.std),
            "concat_reference": self.concat_reference,
            "grayscale": self.grayscale,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            target_size=tuple(obj["target_size"]),
            mean=tuple(obj["mean"]),
            std=tuple(obj["std"]),
            concat_reference=bool(obj["concat_reference"]),
            grayscale=bool(obj["grayscale"]),
        )


@dataclass(frozen=True)
class SensorProfile:
    name: str
    native_resolution: tuple  # (height, width)
    channels: int
    supports_reference: bool = True
    default_preprocess: PreprocessSpec = field(default_factory=PreprocessSpec)

    def __post_init__(self):
        object.__setattr__(self, "native_resolution", tuple(self.native_resolution))
        if min(self.native_resolution) < 1:
            raise ValueError("native resolution must be strictly positive")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")

    @property
    def frame_shape(self):
        return (*self.native_resolution, self.channels)


_lock = threading.Lock()
_registry: dict[str, SensorProfile] = {}


def register_profile(profile: SensorProfile) -> SensorProfile:
    """Register a profile under its unique name and return it."""
    with _lock:
        if profile.name in _registry:
            raise DuplicateProfileError(
                f"profile {profile.name!r} is already registered"
            )
        _registry[profile.name] = profile
    return profile


def ensure_profile(profile: SensorProfile) -> SensorProfile:
    """Register if absent; reject a silent redefinition."""
    with _lock:
        existing = _registry.get(profile.name)
        if existing is None:
            _registry[profile.name] = profile
            return profile
        if existing != profile:
            raise DuplicateProfileError(
                f"profile {profile.name!r} already registered with different fields"
            )
        return existing


def lookup_profile(name: str) -> SensorProfile:
    with _lock:
        try:
            return _registry[name]
        except KeyError:
            raise UnknownProfileError(
                f"no sensor profile named {name!r}; registered: {sorted(_registry)}"
            ) from None


def registered_profiles() -> list[str]:
    with _lock:
        return sorted(_registry)


def mono_variant(profile: SensorProfile) -> SensorProfile:
    """Single-channel sibling of an RGB profile (same optics, mono light)."""
    if profile.channels == 1:
        return profile
    pp = profile.default_preprocess
    mono = SensorProfile(
        name=profile.name + "-mono",
        native_resolution=profile.native_resolution,
        channels=1,
        supports_reference=profile.supports_reference,
        default_preprocess=replace(pp, mean=(pp.mean[0],), std=(pp.std[0],)),
    )
    return ensure_profile(mono)


# Built-in sensors. GelSight frames are wider than tall; its published
# resolution is canonicalized here as height x width = 960 x 1280, and it
# has no usable no-touch reference.
DIGIT = SensorProfile("digit", (240, 320), 3)
OMNITACT = SensorProfile("omnitact", (480, 640), 3)
GELSIGHT = SensorProfile("gelsight", (960, 1280), 3, supports_reference=False)

for _p in (DIGIT, OMNITACT, GELSIGHT):
    register_profile(_p)
