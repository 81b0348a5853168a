"""Input checks shared by the estimator layer."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ConfigError
from .selectors import as_selector


def check_sweep_values(X) -> np.ndarray:
    """Coerce a scalar, 1-d sequence or single-column 2-d array to a flat float array."""
    arr = np.asarray(X, dtype=object if isinstance(X, list) else None)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=np.float64, ensure_min_samples=0)
    if arr.shape[1] != 1:
        raise ConfigError(f"expected a single column of sweep values, got shape {arr.shape}")
    return arr[:, 0]


def check_sizes(sizes) -> tuple:
    out = tuple(int(s) for s in np.atleast_1d(sizes))
    if not out or any(s < 2 for s in out):
        raise ConfigError(f"lattice sizes must all be >= 2, got {sizes!r}")
    return out


def check_choice(name: str, value, allowed) -> str:
    if value not in allowed:
        raise ConfigError(f"{name} must be one of {tuple(allowed)}, got {value!r}")
    return value


def check_base(base) -> str:
    text = str(base)
    return check_choice("base", text, ("e", "2"))


def check_selectors(selectors) -> list:
    if isinstance(selectors, str):
        selectors = [selectors]
    out = [as_selector(s) for s in selectors]
    if not out:
        raise ConfigError("at least one selector is required")
    return out
