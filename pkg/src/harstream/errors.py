"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes, so new error types should subclass one
of the three branches below rather than Exception directly.
"""


class HarstreamError(Exception):
    """Base class for all errors raised by this package."""


class DataError(HarstreamError):
    """Malformed or invalid external data (CSV rows, wire frames, files)."""


class StateError(HarstreamError):
    """An operation was invoked in a machine state that does not allow it."""


class TrainingError(HarstreamError):
    """Model fitting could not proceed (insufficient or degenerate data)."""


class SnapshotFormatError(DataError):
    """A snapshot file is corrupt or structurally invalid."""


class SnapshotCompatibilityError(DataError):
    """A snapshot file declares a schema version this build does not support."""
