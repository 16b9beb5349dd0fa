"""Exception types raised across the package.

Every error the library raises on purpose derives from ActsumError so
callers (and the CLI) can distinguish diagnosed failures from bugs.
"""


class ActsumError(Exception):
    """Base class for all errors raised by this package."""


# numerics
class NotPositiveDefinite(ActsumError):
    """A matrix expected to be positive definite has a nonpositive pivot."""


class NonFiniteValue(ActsumError):
    """A computation produced or received NaN or infinity."""


class ShapeMismatch(ActsumError):
    """Array shapes are inconsistent with the operation's contract."""


class IndexOutOfRange(ActsumError):
    """A frame or segment index falls outside the valid range."""


# segmentation / labels
class EmptyInput(ActsumError):
    """An operation received an empty sequence where data is required."""


class EmptyAnnotations(ActsumError):
    """No user annotations were supplied."""


class DegenerateWeights(ActsumError):
    """A key segment's sampling weights sum to zero."""


# losses
class SingularSubset(ActsumError):
    """The kernel minor of the target subset is singular (probability zero)."""


# evaluation
class LengthMismatch(ActsumError):
    """Two per-frame sequences differ in length."""


class TooFewUsers(ActsumError):
    """At least two annotators are required for a consensus metric."""


class EmptySelection(ActsumError):
    """A distribution was requested over an empty frame selection."""


# training
class EmptyDataset(ActsumError):
    """A training or evaluation dataset contains no videos."""


# io
class MalformedFile(ActsumError):
    """A structured input file failed validation; message names the field."""


class BadMagic(MalformedFile):
    """A binary file does not start with the expected magic bytes."""


class TruncatedFile(MalformedFile):
    """A binary file is shorter than its header declares."""


class NonFiniteEntry(MalformedFile):
    """A binary payload contains NaN or infinity; message gives the offset."""


class ChecksumMismatch(MalformedFile):
    """A checkpoint's integrity checksum does not match its contents."""


class VersionUnsupported(MalformedFile):
    """A file declares a format version this build cannot read."""


class InvalidSpec(ActsumError):
    """A synthetic-corpus spec has out-of-range parameters."""
