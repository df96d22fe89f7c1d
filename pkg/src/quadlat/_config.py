"""Runtime switches read from the environment.

QUADLAT_DISABLE_NUMBA=1   run every kernel through the pure Python/numpy path
QUADLAT_BUDGET=<int>      global search budget (backtracking nodes / oracle nodes)
"""

import os

DEFAULT_BUDGET = 5_000_000


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


DISABLE_NUMBA = _flag("QUADLAT_DISABLE_NUMBA")


def search_budget():
    raw = os.environ.get("QUADLAT_BUDGET", "").strip()
    if not raw:
        return DEFAULT_BUDGET
    value = int(raw)
    if value <= 0:
        raise ValueError("QUADLAT_BUDGET must be positive")
    return value


class BudgetExceeded(RuntimeError):
    """A search ran past its configured node budget."""


class _Inconclusive:
    """Third outcome of local searches; refuses to be coerced to a bool."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        raise TypeError("INCONCLUSIVE has no truth value; test with `is INCONCLUSIVE`")

    def __repr__(self):
        return "INCONCLUSIVE"

    def __reduce__(self):
        return (_Inconclusive, ())


INCONCLUSIVE = _Inconclusive()
