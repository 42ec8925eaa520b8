"""Exception types shared across the toolkit.

Each maps to a distinct CLI exit code (see hoplight.cli).
"""


class HoplightError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(HoplightError):
    """Invalid game/schedule/analysis configuration."""


class SchemaError(HoplightError):
    """A persisted file is corrupt, truncated, or has the wrong schema/version."""


class ProvenanceError(HoplightError):
    """Downstream file does not match the hash of its upstream input."""


class IntegrityError(HoplightError):
    """Deterministic replay diverged from the recorded trace."""
