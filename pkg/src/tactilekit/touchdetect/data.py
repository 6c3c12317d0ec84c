"""Touch-detection datasets: labeled frames plus the on-disk manifest.

On disk a dataset is a directory with a `manifest.csv` of
(path, label, device_serial, sensor_profile, reference_path) rows and PNG
images. Samples load their pixels lazily so full-resolution datasets never
sit in memory at once.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import TactileKitError
from ..sensors import Frame, load_png_frame, lookup_profile

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ("path", "label", "device_serial", "sensor_profile",
                    "reference_path")


class ManifestError(TactileKitError):
    """Malformed dataset manifest."""


@dataclass
class TouchSample:
    label: int
    device_serial: str
    profile: object
    frame: Frame | None = None
    frame_path: Path | None = None
    reference: Frame | None = None
    reference_path: Path | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"touch label must be 0 or 1, got {self.label}")
        if self.frame is None and self.frame_path is None:
            raise ValueError("sample needs pixels or a path to them")

    def load_frame(self) -> Frame:
        if self.frame is not None:
            return self.frame
        return load_png_frame(self.frame_path, self.profile, self.device_serial)

    def has_reference(self) -> bool:
        return self.reference is not None or self.reference_path is not None

    def load_reference(self) -> Frame | None:
        if self.reference is not None:
            return self.reference
        if self.reference_path is None:
            return None
        return load_png_frame(self.reference_path, self.profile,
                              self.device_serial)

    @property
    def stratum(self):
        return (self.label, self.device_serial)


@dataclass
class TouchDataset:
    samples: list = field(default_factory=list)

    def __post_init__(self):
        if not self.samples:
            raise ValueError("dataset is empty")

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def profile_names(self):
        return sorted({s.profile.name for s in self.samples})

    def class_counts(self):
        return Counter(s.label for s in self.samples)

    def serial_counts(self):
        """Sample counts per (label, device_serial) stratum."""
        return Counter(s.stratum for s in self.samples)

    def subset(self, indices):
        return TouchDataset([self.samples[i] for i in indices])

    def all_referenced(self):
        return all(s.has_reference() for s in self.samples)


def load_manifest(dataset_dir) -> TouchDataset:
    """Read a dataset directory produced by the generator or by hand."""
    dataset_dir = Path(dataset_dir)
    manifest = dataset_dir / MANIFEST_NAME
    if manifest.is_file() is False:
        raise ManifestError(f"no {MANIFEST_NAME} in {dataset_dir}")
    samples = []
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS[:4]) - set(reader.fieldnames or ())
        if missing:
            raise ManifestError(f"{manifest}: missing columns {sorted(missing)}")
        for row in reader:
            profile = lookup_profile(row["sensor_profile"])
            ref = (row.get("reference_path") or "").strip()
            samples.append(TouchSample(
                label=int(row["label"]),
                device_serial=row["device_serial"],
                profile=profile,
                frame_path=dataset_dir / row["path"],
                reference_path=dataset_dir / ref if ref else None,
            ))
    return TouchDataset(samples)


def write_manifest(dataset_dir, rows):
    """Atomically write manifest rows (dicts keyed by MANIFEST_COLUMNS)."""
    dataset_dir = Path(dataset_dir)
    tmp = dataset_dir / (MANIFEST_NAME + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    tmp.replace(dataset_dir / MANIFEST_NAME)
