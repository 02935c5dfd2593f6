"""Default work budgets, overridable through environment variables."""

import os

_DEFAULTS = {
    "IMMUNIZATION_MAX_STATES": 2_000_000,
    "IMMUNIZATION_MAX_SUBSETS": 5_000_000,
    "IMMUNIZATION_MAX_PW_VERTICES": 24,
}


def default_budget(name):
    """Return the budget ``name`` from the environment, falling back to the built-in default."""
    raw = os.environ.get(name)
    if raw is None:
        return _DEFAULTS[name]
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def max_states():
    return default_budget("IMMUNIZATION_MAX_STATES")


def max_subsets():
    return default_budget("IMMUNIZATION_MAX_SUBSETS")


def max_pathwidth_vertices():
    return default_budget("IMMUNIZATION_MAX_PW_VERTICES")
