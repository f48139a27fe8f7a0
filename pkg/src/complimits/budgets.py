"""Size budgets for exact computations.

Defaults are safe for an interactive machine and can be overridden per call,
or globally through environment variables:

    COMPLIMITS_TYPE_CLASS_BUDGET   max number of type classes in an exact
                                   memoryless spectrum (default 2_000_000)
    COMPLIMITS_ENUM_BUDGET         max number of strings enumerated exactly
                                   (Markov spectra, code tables; default 20_000)
"""

import os
from dataclasses import dataclass

_DEFAULT_TYPE_CLASSES = 2_000_000
_DEFAULT_ENUMERATION = 20_000


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Budgets:
    """Resolved budget set; construct via :func:`default_budgets`."""

    type_classes: int = _DEFAULT_TYPE_CLASSES
    enumeration: int = _DEFAULT_ENUMERATION


def default_budgets() -> Budgets:
    """Budgets from environment overrides, falling back to library defaults."""
    return Budgets(
        type_classes=_env_int("COMPLIMITS_TYPE_CLASS_BUDGET", _DEFAULT_TYPE_CLASSES),
        enumeration=_env_int("COMPLIMITS_ENUM_BUDGET", _DEFAULT_ENUMERATION),
    )
