"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class GeometryError(ValueError):
    """Degenerate geometry (coincident positions, zero link distance)."""


class ConstraintError(RuntimeError):
    """A decision violated presence, assignment, or single-use constraints."""


class AccountingError(RuntimeError):
    """Internal bookkeeping produced an inconsistent quantity."""
