"""Sweep configuration: TOML schema, defaults and validation.

Schema (all keys optional unless noted)::

    [model]
    kind = "boson"                 # required: boson | spin
    sizes = [36]                   # required: lattice sizes per axis
    size_series = [[4], [6]]       # run the same sweep on several lattices
    spin = 0.5                     # spin models only
    [model.first_neighbor]         # shorthand, per-axis lists or scalars
    delta_plus = 1.0               # boson
    delta_minus = 0.3333333333333333
    j_x = 1.0                      # spin
    j_y = 0.5
    [[model.couplings]]            # explicit displacement -> value pairs
    kind = "delta_plus"            # delta_plus | delta_minus | j_x | j_y
    l = [1]
    value = 0.5
    [model.sweep]
    variable = "lambda_ratio"      # lambda | lambda_ratio | lambda_excess | B | B_ratio
    from = 1.001                   # linear grid ...
    to = 5.0
    steps = 40
    log_from = -6                  # ... or base-10 exponents of a geometric grid
    log_to = -4
    values = [1.5, 2.0]            # ... or an explicit list

    selectors = ["single_site", "block:18", "even_comb"]
    methods = ["gaussian"]         # gaussian | asymptotic | fock_oracle | rpa | ed

    [output]
    dir = "out"
    log_base = "e"                 # e | 2
    figure_preset = "none"         # fig2_1d | fig2_2d | fig3 | fig4 | none
    workers = 1

    [oracle]
    cutoff = 30
    tol = 1e-6

    [ed]
    cap = 1048576
"""
from __future__ import annotations

import copy
import sys
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .selectors import parse_selector

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

BOSON_METHODS = ("gaussian", "asymptotic", "fock_oracle")
SPIN_METHODS = ("rpa", "ed", "asymptotic")
BOSON_VARIABLES = ("lambda", "lambda_ratio", "lambda_excess")
SPIN_VARIABLES = ("B", "B_ratio")
PRESETS = ("fig2_1d", "fig2_2d", "fig3", "fig4", "none")

DEFAULTS = {
    "selectors": ["single_site"],
    "output": {"dir": "out", "log_base": "e", "figure_preset": "none", "workers": 1},
    "oracle": {"cutoff": 30, "tol": 1e-6},
    "ed": {"cap": 2**20},
}


def load_config(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such config file") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return resolve_config(raw, source=str(path))


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return table[key]


def _sizes(value, where):
    try:
        sizes = [int(v) for v in np.atleast_1d(value)]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: sizes must be a list of integers") from exc
    if not sizes or any(s < 2 for s in sizes):
        raise ConfigError(f"{where}: every size must be >= 2, got {sizes}")
    return sizes


def resolve_config(raw: dict, source: str = "<config>") -> dict:
    """Validate ``raw`` and return a fully-resolved copy with defaults filled in."""
    cfg = _merge(DEFAULTS, raw)
    model = _need(cfg, "model", source)
    kind = _need(model, "kind", f"{source} [model]")
    if kind not in ("boson", "spin"):
        raise ConfigError(f"{source} [model] kind: expected boson or spin, got {kind!r}")
    model["sizes"] = _sizes(_need(model, "sizes", f"{source} [model]"), f"{source} [model] sizes")
    if "size_series" in model:
        model["size_series"] = [
            _sizes(s, f"{source} [model] size_series") for s in model["size_series"]
        ]
    else:
        model["size_series"] = [model["sizes"]]

    fn = model.get("first_neighbor")
    explicit = model.get("couplings", [])
    if fn is None and not explicit:
        raise ConfigError(f"{source} [model]: give first_neighbor or couplings")
    allowed = ("delta_plus", "delta_minus") if kind == "boson" else ("j_x", "j_y")
    if fn is not None:
        for key in fn:
            if key not in allowed:
                raise ConfigError(f"{source} [model.first_neighbor]: unknown field '{key}'")
        for key in allowed:
            fn.setdefault(key, 0.0)
    for i, entry in enumerate(explicit):
        where = f"{source} [[model.couplings]] #{i + 1}"
        if entry.get("kind") not in allowed:
            raise ConfigError(f"{where}: kind must be one of {allowed}")
        _need(entry, "l", where)
        _need(entry, "value", where)
    if kind == "spin":
        model["spin"] = float(model.get("spin", 0.5))

    sweep = _need(model, "sweep", f"{source} [model]")
    variables = BOSON_VARIABLES if kind == "boson" else SPIN_VARIABLES
    sweep.setdefault("variable", variables[1])
    if sweep["variable"] not in variables:
        raise ConfigError(
            f"{source} [model.sweep] variable: expected one of {variables}, got {sweep['variable']!r}"
        )
    sweep_grid(sweep, f"{source} [model.sweep]")

    methods = _need(cfg, "methods", source)
    allowed_methods = BOSON_METHODS if kind == "boson" else SPIN_METHODS
    for m in methods:
        if m not in allowed_methods:
            raise ConfigError(
                f"{source} methods: {m!r} not available for {kind} models {allowed_methods}"
            )
    if "fock_oracle" in methods:
        for sizes in model["size_series"]:
            if int(np.prod(sizes)) > 3:
                raise ConfigError(f"{source} methods: fock_oracle needs at most 3 sites")
    for text in cfg["selectors"]:
        parse_selector(text)

    out = cfg["output"]
    if str(out["log_base"]) not in ("e", "2"):
        raise ConfigError(f"{source} [output] log_base: expected 'e' or 2")
    out["log_base"] = str(out["log_base"])
    if out["figure_preset"] not in PRESETS:
        raise ConfigError(f"{source} [output] figure_preset: expected one of {PRESETS}")
    out["workers"] = int(out["workers"])
    return cfg


def sweep_grid(sweep: dict, where: str = "[model.sweep]") -> np.ndarray:
    if "values" in sweep:
        return np.asarray(sweep["values"], dtype=float)
    steps = int(_need(sweep, "steps", where))
    if steps < 0:
        raise ConfigError(f"{where}: steps must be >= 0")
    if "log_from" in sweep or "log_to" in sweep:
        lo = float(_need(sweep, "log_from", where))
        hi = float(_need(sweep, "log_to", where))
        return np.logspace(lo, hi, steps) if steps else np.empty(0)
    lo = float(_need(sweep, "from", where))
    hi = float(_need(sweep, "to", where))
    return np.linspace(lo, hi, steps) if steps else np.empty(0)
