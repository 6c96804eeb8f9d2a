"""Exception hierarchy shared by the whole toolkit.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured diagnostics to stderr.
"""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all toolkit errors."""

    code = "pipeline-error"

    def __init__(self, message: str, *, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class EmptyMaskError(PipelineError):
    code = "empty-mask"


class RleLengthMismatchError(PipelineError):
    code = "rle-length-mismatch"


class DuplicateIdError(PipelineError):
    code = "duplicate-id"


class SceneFormatError(PipelineError):
    """Schema or invariant violation while loading a scene file."""

    code = "scene-format"


class EmptyRegionError(PipelineError):
    code = "empty-region"


class RegionTooSmallError(PipelineError):
    code = "region-too-small"


class MixedMeasuresError(PipelineError):
    code = "mixed-measures"


class UnknownInstanceError(PipelineError):
    code = "unknown-instance"


class MissingFocusError(PipelineError):
    code = "missing-focus"


class EmptyReportError(PipelineError):
    code = "empty-report"


class PlacementFailedError(PipelineError):
    """Synthetic scene generation could not place all crystals."""

    code = "placement-failed"

    def __init__(self, message: str, placed: int, requested: int):
        self.placed = placed
        self.requested = requested
        super().__init__(f"{message} (placed {placed}/{requested})")


class UsageError(PipelineError):
    """Mutually inconsistent flags or arguments."""

    code = "usage"


class MissingLabelError(PipelineError):
    """Agglomeration label required but absent."""

    code = "missing-label"


class MissingCounterpartError(PipelineError):
    """A scene file lacks its ground-truth or prediction counterpart."""

    code = "missing-counterpart"
