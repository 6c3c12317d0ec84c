"""Exception hierarchy shared across the library."""


class TactileKitError(Exception):
    """Base class for all library errors."""


class ShapeCompositionError(TactileKitError):
    """Layer shapes do not compose; carries the offending layer index."""

    def __init__(self, layer_index, message):
        self.layer_index = layer_index
        super().__init__(f"layer {layer_index}: {message}")


class StaleTapeError(TactileKitError):
    """Backward called with a tape from a different network or parameter set."""


class DuplicateProfileError(TactileKitError):
    """A sensor profile with this name is already registered."""


class UnknownProfileError(TactileKitError):
    """No sensor profile registered under this name."""


class FrameShapeError(TactileKitError):
    """Frame pixel dimensions do not match the declared sensor profile."""


class MissingReferenceError(TactileKitError):
    """Preprocessing or inference required a reference frame that was not given."""


class ProfileMismatchError(TactileKitError):
    """Frame's sensor profile is not accepted by the consumer."""


class SingleClassDatasetError(TactileKitError):
    """Training requires both classes present in the dataset."""


class ReferenceUnsupportedError(TactileKitError):
    """Reference modality requested for a sensor that has no reference support."""


class StratificationError(TactileKitError):
    """A (label, serial) stratum is too small for the requested fold count."""


class FreezePolicyError(TactileKitError):
    """Freeze policy names more parameterized layers than the network has."""


class WindowBoundsError(TactileKitError):
    """Requested frame window exceeds the sequence bounds."""


class SplitError(TactileKitError):
    """Dataset split is infeasible for the requested mode."""


class UnsupportedConfigurationError(TactileKitError):
    """A (architecture, window length) combination that is explicitly unsupported."""


class WindowLengthError(TactileKitError):
    """Inference window length differs from the detector's trained length."""


class DegenerateRegionError(TactileKitError):
    """Blob mask is degenerate (collinear pixels); carries centroid and major axis."""

    def __init__(self, centroid, semi_major, message="degenerate contact region"):
        self.centroid = centroid
        self.semi_major = semi_major
        super().__init__(message)


class IncompleteMetadataError(TactileKitError):
    """Model artifact metadata is missing required fields."""


class ArtifactCorruptionError(TactileKitError):
    """Model artifact digest does not match its contents."""


class ArtifactVersionError(TactileKitError):
    """Model artifact has an unknown format version."""


class ModelNotFoundError(TactileKitError):
    """Registry has no entry for the requested key; lists what is available."""

    def __init__(self, key, available):
        self.key = key
        self.available = sorted(available)
        super().__init__(
            f"no registry entry for {key!r}; available: {self.available}"
        )


class TaskMismatchError(TactileKitError):
    """Loaded artifact was trained for a different task."""


class SourceExhaustedError(TactileKitError):
    """Frame source ended before yielding the required number of frames."""


class GenerationError(TactileKitError):
    """Synthetic scene parameters are invalid (e.g. blob outside the frame)."""
