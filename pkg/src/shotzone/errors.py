"""Exception types shared across the package."""


class ShotzoneError(Exception):
    """Base class for all package-specific errors."""


class UnknownShotLabel(ShotzoneError, ValueError):
    """Shot name outside the 25-name taxonomy."""


class OutOfRange(ShotzoneError, ValueError):
    """Physical quantity outside its documented domain."""


class SchemaError(ShotzoneError):
    """Corpus file header does not match the documented column schema."""


class OrderError(ShotzoneError):
    """Duplicate or mis-ordered (match, innings, over, ball) key."""


class MissingShot(ShotzoneError):
    """Delivery carries no shot label where one is required."""


class MissingAngle(ShotzoneError):
    """Aggressive shot without a recorded shot angle."""


class RoleMismatch(ShotzoneError):
    """Player is not a participant in the delivery for the requested role."""


class ConfigError(ShotzoneError):
    """Invalid configuration (empty axis, bad fraction, missing players...)."""


class ShapeMismatch(ShotzoneError):
    """Tensor shapes disagree."""


class DivergenceError(ShotzoneError):
    """Training loss became non-finite."""


class VersionMismatch(ShotzoneError):
    """Bundle and taxonomy/feature-ledger versions disagree."""


class FormatVersionError(ShotzoneError):
    """Unreadable or wrong-version bundle file."""


class UnknownPlayer(ShotzoneError, KeyError):
    """Scenario references a player absent from the profile store."""
