"""Exception types shared across the package.

Plain I/O failures use the builtin ``FileNotFoundError`` / ``OSError``;
everything that carries pipeline semantics gets its own class so the CLI
and the HTTP service can map failures to exit codes / status codes.
"""


class NetgrabError(Exception):
    """Base class for all netgrab-specific failures."""


class DecodeError(NetgrabError):
    """File exists but is not a decodable PNG."""


class InvalidParameterError(NetgrabError):
    """An operation parameter is outside its documented domain."""


class DegenerateImageError(NetgrabError):
    """Image has too little variation for the requested operation."""


class EmptyMarkersError(NetgrabError):
    """Marker derivation erased every foreground seed."""


class InconsistentSkeletonError(NetgrabError):
    """Skeleton violates the one-pixel-wide fixpoint assumption."""


class DimensionMismatchError(NetgrabError):
    """Two rasters (or a raster and a graph) disagree on dimensions."""


class EmptyGraphError(NetgrabError):
    """Graph has no vertices (or no edges) where some are required."""


class PipelineParseError(NetgrabError):
    """Pipeline file is not well-formed."""


class PipelineValidationError(NetgrabError):
    """Pipeline is well-formed but semantically invalid.

    ``stage_index`` is the offending stage position, or None when the
    problem is not attributable to a single stage (e.g. a missing
    segmentation stage).
    """

    def __init__(self, message: str, stage_index: int | None = None):
        super().__init__(message)
        self.stage_index = stage_index


class GraphFormatError(NetgrabError):
    """Graph file is not in the v1 format.

    ``line`` is the 1-based offending line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line
