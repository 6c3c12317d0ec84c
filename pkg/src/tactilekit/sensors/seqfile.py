"""TKSEQ1 container: raw frame sequences on disk.

Layout (integers little-endian):

    magic   6 bytes  b"TKSEQ1"
    u8      profile name length
    bytes   profile name, UTF-8
    u32     frame count
    f32     frames per second
    frames  count * height * width * channels bytes, raw 8-bit HWC planes

Frame geometry comes from the named sensor profile, which must be
registered when the file is read.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ProfileMismatchError, TactileKitError
from .frames import Frame
from .profiles import lookup_profile

MAGIC = b"TKSEQ1"
DEFAULT_FPS = 30.0


class SequenceFileError(TactileKitError):
    """Malformed TKSEQ1 container."""


def write_sequence(path, frames, fps: float = DEFAULT_FPS):
    """Write frames (all one profile) as a TKSEQ1 file."""
    frames = list(frames)
    if not frames:
        raise ValueError("cannot write an empty sequence")
    profile = frames[0].sensor
    for f in frames:
        if f.sensor.name != profile.name:
            raise ProfileMismatchError(
                "all frames in a sequence must share one profile"
            )
    name = profile.name.encode("utf-8")
    if len(name) > 255:
        raise ValueError("profile name too long for the container")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", len(name)))
        fh.write(name)
        fh.write(struct.pack("<If", len(frames), float(fps)))
        for f in frames:
            fh.write(np.ascontiguousarray(f.pixels).tobytes())
    return path


def read_header(path):
    """(profile, frame_count, fps, payload_offset) of a TKSEQ1 file."""
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != MAGIC:
            raise SequenceFileError(f"{path}: bad magic {magic!r}")
        (name_len,) = struct.unpack("<B", fh.read(1))
        name = fh.read(name_len).decode("utf-8")
        count, fps = struct.unpack("<If", fh.read(8))
        offset = 6 + 1 + name_len + 8
    profile = lookup_profile(name)
    return profile, count, fps, offset


def read_frame(path, index, device_serial=None):
    """Random access to one frame without loading the whole sequence."""
    profile, count, fps, offset = read_header(path)
    if not 0 <= index < count:
        raise SequenceFileError(f"{path}: frame {index} out of {count}")
    h, w = profile.native_resolution
    size = h * w * profile.channels
    with open(path, "rb") as fh:
        fh.seek(offset + index * size)
        raw = fh.read(size)
    if len(raw) != size:
        raise SequenceFileError(f"{path}: truncated frame {index}")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(h, w, profile.channels)
    return Frame(pixels.copy(), profile,
                 timestamp_ms=index * 1000.0 / fps,
                 device_serial=device_serial)


def read_frames(path, start=0, count=None, device_serial=None):
    """Read a contiguous run of frames; count=None reads to the end."""
    profile, total, fps, offset = read_header(path)
    if count is None:
        count = total - start
    if start < 0 or start + count > total:
        raise SequenceFileError(
            f"{path}: frames [{start}, {start + count}) out of {total}"
        )
    h, w = profile.native_resolution
    size = h * w * profile.channels
    with open(path, "rb") as fh:
        fh.seek(offset + start * size)
        raw = fh.read(size * count)
    if len(raw) != size * count:
        raise SequenceFileError(f"{path}: truncated payload")
    block = np.frombuffer(raw, dtype=np.uint8).reshape(count, h, w, profile.channels)
    return [
        Frame(block[i].copy(), profile,
              timestamp_ms=(start + i) * 1000.0 / fps,
              device_serial=device_serial)
        for i in range(count)
    ], fps
