"""tactilekit: touch processing for vision-based tactile sensors."""

__version__ = "0.1.0"

TOUCH_DETECT = "touch_detect"
SLIP_DETECT = "slip_detect"

from .facade import TouchProcessor, init  # noqa: E402

__all__ = ["SLIP_DETECT", "TOUCH_DETECT", "TouchProcessor", "init", "__version__"]
