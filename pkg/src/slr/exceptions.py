"""Exception types raised across the package.

Every domain failure derives from :class:`SLRError` so callers (the CLI in
particular) can map them to a single exit code.
"""


class SLRError(Exception):
    """Base class for all domain errors."""


class InvalidValue(SLRError, ValueError):
    """A value violates a type invariant (non-finite coordinate, bad label...)."""


class DegenerateFrame(SLRError, ValueError):
    """Spine and both shoulders are collinear; no body-plane normal exists."""


class DegenerateProjection(SLRError, ValueError):
    """Body-plane normal is (near) vertical, so its XZ projection vanishes."""


class DimensionMismatch(SLRError, ValueError):
    pass


class InvalidDimension(SLRError, ValueError):
    pass


class LabelOutOfRange(SLRError, ValueError):
    pass


class TraceMismatch(SLRError, ValueError):
    """A forward trace does not belong to the model passed to ``backward``."""


class ShapeMismatch(SLRError, ValueError):
    pass


class EmptyDataset(SLRError, ValueError):
    pass


class EmptyTestSet(SLRError, ValueError):
    pass


class InsufficientSigners(SLRError, ValueError):
    pass


class InsufficientClasses(SLRError, ValueError):
    pass


class InvalidConfig(SLRError, ValueError):
    pass


class DataIOError(SLRError, OSError):
    """Filesystem failure while reading or writing a dataset or model."""


class _LocatedError(SLRError, ValueError):
    """Parse error carrying the offending file and 1-based line number."""

    def __init__(self, message, path=None, line=None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
            where += ": "
        super().__init__(where + message)


class MalformedManifest(_LocatedError):
    pass


class MalformedGesture(_LocatedError):
    pass


class MalformedModel(_LocatedError):
    """Model file that cannot be parsed."""


class VersionMismatch(MalformedModel):
    pass


class TensorShapeMismatch(MalformedModel):
    pass


class TruncatedFile(MalformedModel):
    pass
