"""Config-driven parameter sweeps and their on-disk outputs."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import weak_coupling_predictions_dd
from .config import resolve_config, sweep_grid
from .exact_spin import exact_ground_state, reduced_entropy_exact
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DomainError,
    InstabilityError,
    NumericalDegeneracyError,
    UnsupportedModelError,
)
from .fock_oracle import truncated_ground_state_entropy
from .gaussian import log_divisor, mode_contractions, subsystem_entropy
from .lattice import CouplingModel, LatticeSpec, critical_lambda, dispersion
from .selectors import Block, EvenComb, SingleSite, parse_selector
from .spin import SpinModel
from .spin_rpa import rpa_entropy

log = logging.getLogger(__name__)

COLUMNS = (
    "lattice",
    "sweep_value",
    "method",
    "selector",
    "status",
    "entropy_raw",
    "entropy_shifted",
    "shift",
    "shift_applied",
    "regime",
    "symplectic_spectrum_head",
    "note",
)
REFUSED = ("refused_critical", "unsupported")
FAILED = ("numerical_failure", "not_converged")


@dataclass(frozen=True)
class SweepRow:
    lattice: str
    sweep_value: float
    method: str
    selector: str
    status: str = "ok"
    entropy_raw: float = math.nan
    shift: float = 0.0
    shift_applied: bool = False
    regime: str = ""
    spectrum_head: tuple = ()
    note: str = ""
    runtime_ms: float = 0.0

    @property
    def entropy_shifted(self) -> float:
        return self.entropy_raw + (self.shift if self.shift_applied else 0.0)


@dataclass
class SweepTable:
    config: dict
    rows: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        statuses = {r.status for r in self.rows}
        if statuses & set(FAILED):
            return 2
        if statuses & set(REFUSED):
            return 3
        return 0

    def select(self, **where) -> list:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in where.items())]


# ---------------------------------------------------------------- model building


def _couplings(model_cfg: dict, lattice: LatticeSpec, names: tuple) -> dict:
    out = {name: {} for name in names}
    fn = model_cfg.get("first_neighbor")
    if fn is not None:
        for name in names:
            values = np.broadcast_to(np.asarray(fn[name], dtype=float), (lattice.dims,))
            for axis in range(lattice.dims):
                for sign in (1, -1):
                    key = [0] * lattice.dims
                    key[axis] = sign
                    key = tuple(key)
                    out[name][key] = out[name].get(key, 0.0) + values[axis] / 2
    for entry in model_cfg.get("couplings", []):
        key = tuple(int(v) for v in np.atleast_1d(entry["l"]))
        if len(key) != lattice.dims:
            raise ConfigError(f"coupling displacement {list(key)} does not match {lattice.dims} axes")
        out[entry["kind"]][key] = out[entry["kind"]].get(key, 0.0) + float(entry["value"])
    return out


def boson_model(model_cfg: dict, sizes, variable: str, value: float) -> CouplingModel:
    lattice = LatticeSpec(tuple(sizes))
    c = _couplings(model_cfg, lattice, ("delta_plus", "delta_minus"))
    base = CouplingModel(lattice, None, c["delta_plus"], c["delta_minus"])
    if variable == "lambda":
        return base.with_lambda(value)
    lam_c = critical_lambda(base).lambda_c
    factor = value if variable == "lambda_ratio" else 1.0 + value
    return base.with_lambda(factor * lam_c)


def spin_model(model_cfg: dict, sizes, variable: str, value: float) -> SpinModel:
    lattice = LatticeSpec(tuple(sizes))
    c = _couplings(model_cfg, lattice, ("j_x", "j_y"))
    model = SpinModel(lattice, model_cfg["spin"], 0.0, c["j_x"], c["j_y"])
    return model.with_field(value if variable == "B" else value * model.b_c)


def _first_neighbor_axes(model: CouplingModel):
    """Per-axis (D+, D-) if ``model`` is a uniform first-neighbour model, else None."""
    if not model.is_first_neighbor_only():
        return None
    plus, minus = model.plus, model.minus
    dp, dm = [], []
    for axis in range(model.lattice.dims):
        e = [0] * model.lattice.dims
        e[axis] = 1
        key = model.lattice.reduce(tuple(e))
        dp.append(2.0 * plus.get(key, 0.0))
        dm.append(2.0 * minus.get(key, 0.0))
    return dp, dm


# ---------------------------------------------------------------- per-method rows


def _fmt_head(values) -> tuple:
    return tuple(float(v) for v in values)


def _asymptotic_row(model: CouplingModel, selector, base, common):
    axes = _first_neighbor_axes(model)
    if axes is None:
        return dict(common, status="unsupported", note="asymptotics need first-neighbour couplings")
    lattice = model.lattice
    if not critical_lambda(model).stable:
        return dict(common, status="refused_critical", note="lambda at or below lambda_c")
    try:
        pred = weak_coupling_predictions_dd(axes[0], axes[1], model.lam, lattice, base)
    except DomainError as exc:
        return dict(common, status="unsupported", note=str(exc))
    chosen = set(selector.indices(lattice).tolist())
    candidates = {
        "single_site": SingleSite(),
        "even": EvenComb() if lattice.all_even else None,
        "block": Block(lattice.sizes[-1] // 2) if lattice.sizes[-1] >= 2 else None,
    }
    for name, ref in candidates.items():
        if ref is not None and set(ref.indices(lattice).tolist()) == chosen:
            value = pred.single_site if name == "single_site" else getattr(pred, name)
            return dict(common, entropy_raw=float(value), regime="weak_coupling")
    return dict(common, status="unsupported", note="no closed form for this selector")


def _boson_point(cfg, sizes, value):
    model_cfg = cfg["model"]
    base = cfg["output"]["log_base"]
    variable = model_cfg["sweep"]["variable"]
    lattice_label = LatticeSpec(tuple(sizes)).label()
    selectors = [parse_selector(s) for s in cfg["selectors"]]
    model = boson_model(model_cfg, sizes, variable, value)
    contractions = None
    setup_error = None
    rows = []
    for sel_text, sel in zip(cfg["selectors"], selectors):
        for method in cfg["methods"]:
            t0 = time.perf_counter()
            common = dict(lattice=lattice_label, sweep_value=float(value), method=method, selector=sel_text)
            try:
                if method == "gaussian":
                    if contractions is None and setup_error is None:
                        try:
                            contractions = mode_contractions(model)
                        except InstabilityError as exc:
                            setup_error = exc
                    if setup_error is not None:
                        raise setup_error
                    res = subsystem_entropy(contractions, sel, base)
                    row = dict(
                        common, entropy_raw=res.entropy, spectrum_head=_fmt_head(res.spectrum_head(3)),
                        regime="stable",
                    )
                elif method == "asymptotic":
                    row = _asymptotic_row(model, sel, base, common)
                else:
                    if not critical_lambda(model).stable:
                        raise InstabilityError("lambda at or below lambda_c")
                    oc = cfg["oracle"]
                    res = truncated_ground_state_entropy(
                        model, sel, cutoff=int(oc["cutoff"]), base=base, tol=float(oc["tol"])
                    )
                    row = dict(
                        common, entropy_raw=res.entropy,
                        status="ok" if res.converged else "not_converged",
                        regime="fock", note=f"drift={res.drift:.3e}",
                    )
            except InstabilityError as exc:
                row = dict(common, status="refused_critical", note=str(exc))
            except (NumericalDegeneracyError, ConvergenceError, DomainError) as exc:
                row = dict(common, status="numerical_failure", note=str(exc))
            row["runtime_ms"] = 1e3 * (time.perf_counter() - t0)
            rows.append(SweepRow(**row))
    return rows


def _spin_point(cfg, sizes, value):
    model_cfg = cfg["model"]
    base = cfg["output"]["log_base"]
    variable = model_cfg["sweep"]["variable"]
    spin = spin_model(model_cfg, sizes, variable, value)
    lattice = spin.lattice
    delta = math.log(2.0) / log_divisor(base)
    ground = None
    rows = []
    for sel_text in cfg["selectors"]:
        sel = parse_selector(sel_text)
        for method in cfg["methods"]:
            t0 = time.perf_counter()
            common = dict(lattice=lattice.label(), sweep_value=float(value), method=method, selector=sel_text)
            try:
                if method == "rpa":
                    res = rpa_entropy(spin, sel, base)
                    row = dict(
                        common, entropy_raw=res.entropy, shift=res.shift, shift_applied=res.shift_applied,
                        regime=res.extras["regime"], spectrum_head=_fmt_head(res.spectrum_head(3)),
                    )
                    if "O_A" in res.extras:
                        row["note"] = f"O_A={res.extras['O_A']:.6g};O_Abar={res.extras['O_Abar']:.6g}"
                elif method == "ed":
                    if ground is None:
                        ground = exact_ground_state(spin, int(cfg["ed"]["cap"]))
                    d = int(round(2 * spin.spin)) + 1
                    values = {
                        p: reduced_entropy_exact(st.vector, sel, lattice, d, base)
                        for p, st in ground.sectors.items()
                    }
                    below_bs = spin.b_s is not None and abs(spin.field) < spin.b_s
                    row = dict(
                        common, entropy_raw=values[ground.ground_parity], shift=-delta,
                        shift_applied=below_bs, regime=f"parity{ground.ground_parity:+d}",
                    )
                    if ground.crossing:
                        row["regime"] = "crossing"
                        row["note"] = f"S(+1)={values[1]:.12g};S(-1)={values[-1]:.12g}"
                else:
                    row = _spin_asymptotic_row(spin, sel, base, common)
            except InstabilityError as exc:
                row = dict(common, status="refused_critical", note=str(exc))
            except UnsupportedModelError as exc:
                row = dict(common, status="unsupported", note=str(exc))
            except (NumericalDegeneracyError, ConvergenceError, DomainError) as exc:
                row = dict(common, status="numerical_failure", note=str(exc))
            row["runtime_ms"] = 1e3 * (time.perf_counter() - t0)
            rows.append(SweepRow(**row))
    return rows


def _spin_asymptotic_row(spin: SpinModel, sel, base, common):
    if abs(spin.field) <= spin.b_c:
        return dict(common, status="unsupported", note="weak-coupling forms need |B| > B_c")
    plus = {k: 0.5 * (spin.jx.get(k, 0.0) + spin.jy.get(k, 0.0)) for k in spin.jx}
    minus = {k: 0.5 * (spin.jx.get(k, 0.0) - spin.jy.get(k, 0.0)) for k in spin.jx}
    model = CouplingModel(spin.lattice, abs(spin.field), plus, minus)
    return _asymptotic_row(model, sel, base, common)


def _evaluate(task):
    cfg, order, sizes, value = task
    fn = _boson_point if cfg["model"]["kind"] == "boson" else _spin_point
    return order, fn(cfg, sizes, value)


# ---------------------------------------------------------------- driver


def run_sweep(config) -> SweepTable:
    """Evaluate every (lattice, sweep point, selector, method) combination.

    ``config`` is a raw or resolved config mapping.  Points at or inside the
    critical window become rows with a refusal status instead of aborting.
    """
    cfg = resolve_config(config)
    grid = sweep_grid(cfg["model"]["sweep"])
    tasks = [
        (cfg, (li, pi), sizes, float(v))
        for li, sizes in enumerate(cfg["model"]["size_series"])
        for pi, v in enumerate(grid)
    ]
    workers = max(1, cfg["output"]["workers"])
    results = []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, tasks))
    else:
        results = [_evaluate(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    table = SweepTable(cfg)
    for _, rows in results:
        table.rows.extend(rows)
    log.info("sweep finished: %d rows", len(table.rows))
    return table


# ---------------------------------------------------------------- output


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".15g")


def _csv_text(header, records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(records)
    return buf.getvalue()


def results_csv(rows) -> str:
    records = [
        (
            r.lattice,
            _num(r.sweep_value),
            r.method,
            r.selector,
            r.status,
            _num(r.entropy_raw),
            _num(r.entropy_shifted),
            _num(r.shift),
            "true" if r.shift_applied else "false",
            r.regime,
            ";".join(_num(v) for v in r.spectrum_head),
            r.note,
        )
        for r in rows
    ]
    return _csv_text(COLUMNS, records)


def wide_csv(rows, cfg) -> str:
    """One line per sweep point, one raw and one shifted column per (method, selector)."""
    keys = [(m, s) for s in cfg["selectors"] for m in cfg["methods"]]
    header = ["sweep_value"]
    for m, s in keys:
        header += [f"{m}:{s}", f"{m}:{s}+shift"]
    ratio_keys = []
    if "single_site" in cfg["selectors"]:
        ratio_keys = [(m, s) for m, s in keys if s != "single_site"]
        header += [f"{m}:{s}/single_site" for m, s in ratio_keys]
    header.append("crossing")
    points = {}
    for r in rows:
        points.setdefault(r.sweep_value, {})[(r.method, r.selector)] = r
    records = []
    for value, cell in points.items():
        line = [_num(value)]
        for key in keys:
            r = cell.get(key)
            line += [_num(r.entropy_raw), _num(r.entropy_shifted)] if r else ["nan", "nan"]
        for m, s in ratio_keys:
            num, den = cell.get((m, s)), cell.get((m, "single_site"))
            ok = num and den and den.entropy_raw > 0
            line.append(_num(num.entropy_raw / den.entropy_raw) if ok else "nan")
        line.append("1" if any(r.regime == "crossing" for r in cell.values()) else "0")
        records.append(line)
    return _csv_text(header, records)


def intensive_csv(table: SweepTable) -> str:
    """Even-comb entropy per even site for every lattice in the size series."""
    cfg = table.config
    method = "ed" if "ed" in cfg["methods"] else cfg["methods"][0]
    variable = cfg["model"]["sweep"]["variable"]
    records = []
    for r in table.rows:
        if r.method != method or r.selector != "even_comb":
            continue
        sizes = [int(s) for s in r.lattice.split("x")]
        n = int(np.prod(sizes))
        field_value = r.sweep_value
        if variable == "B_ratio":
            field_value = r.sweep_value * spin_model(cfg["model"], sizes, "B", 0.0).b_c
        records.append(
            (_num(field_value), str(n), _num(r.entropy_raw / (n / 2)), _num(r.entropy_shifted / (n / 2)))
        )
    return _csv_text(("B", "n", "S_E_per_site", "S_E_shifted_per_site"), records)


def timings_csv(rows) -> str:
    records = [
        (r.lattice, _num(r.sweep_value), r.method, r.selector, f"{r.runtime_ms:.3f}") for r in rows
    ]
    return _csv_text(("lattice", "sweep_value", "method", "selector", "runtime_ms"), records)


_PLOT_HEAD = """# gnuplot script generated alongside results.csv
set datafile separator ','
set datafile columnheaders
set terminal pngcairo size 1000,450
"""


def plot_script(cfg, wide_files) -> str | None:
    preset = cfg["output"]["figure_preset"]
    if preset == "none":
        return None
    variable = cfg["model"]["sweep"]["variable"]
    lines = [_PLOT_HEAD, f"set output '{preset}.png'", "set multiplot layout 1,2"]
    wide = wide_files[0]
    if preset in ("fig2_1d", "fig2_2d"):
        xexpr = {
            "lambda_excess": '(column("sweep_value"))',
            "lambda_ratio": '(column("sweep_value")-1)',
            "lambda": '(column("sweep_value"))',
        }[variable]
        lines += ["set logscale x", "set xlabel 'lambda/lambda_c - 1'", "set ylabel 'S'"]
        curves = [
            f"'{wide}' using {xexpr}:(column(\"gaussian:{s}\")) with lines title '{s}'"
            for s in cfg["selectors"]
        ]
        lines.append("plot " + ", \\\n     ".join(curves))
        ratios = [
            f"'{wide}' using {xexpr}:(column(\"gaussian:{s}/single_site\")) with lines title '{s}/single_site'"
            for s in cfg["selectors"]
            if s != "single_site"
        ]
        lines += ["set ylabel 'ratio'", "plot " + ", \\\n     ".join(ratios) if ratios else ""]
    elif preset == "fig3":
        lines += ["set xlabel 'B/B_c'", "set ylabel 'S (bits)'"]
        for s in cfg["selectors"]:
            curves = [
                f"'{wide}' using 1:(column(\"{m}:{s}+shift\" )) with lines title '{m}'"
                if m == "rpa"
                else f"'{wide}' using 1:(column(\"{m}:{s}\")) with lines title '{m}'"
                for m in cfg["methods"]
            ]
            if "ed" in cfg["methods"]:
                curves.append(
                    f"'{wide}' using 1:(column(\"crossing\")>0 ? column(\"ed:{s}\") : 1/0) "
                    "with points pt 7 title 'crossing'"
                )
            lines += [f"set title '{s}'", "plot " + ", \\\n     ".join(curves)]
    elif preset == "fig4":
        lines += ["set xlabel 'B'", "set ylabel 'S_E / n_E'"]
        sizes = [int(np.prod(s)) for s in cfg["model"]["size_series"]]
        for col in ("S_E_per_site", "S_E_shifted_per_site"):
            curves = [
                f"'intensive.csv' using 1:(column(\"n\")=={n} ? column(\"{col}\") : 1/0) "
                f"with lines title 'n={n}'"
                for n in sizes
            ]
            lines += [f"set title '{col}'", "plot " + ", \\\n     ".join(curves)]
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_outputs(table: SweepTable, out_dir=None) -> list:
    """Write the CSV files, run metadata and plot script; return the paths written."""
    cfg = table.config
    out = Path(out_dir if out_dir is not None else cfg["output"]["dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror or exc}") from exc
    written = []

    def put(name, text):
        path = out / name
        _write(path, text)
        written.append(path)

    put("results.csv", results_csv(table.rows))
    put("timings.csv", timings_csv(table.rows))
    labels = [LatticeSpec(tuple(s)).label() for s in cfg["model"]["size_series"]]
    wide_files = []
    for label in labels:
        rows = [r for r in table.rows if r.lattice == label]
        suffix = "" if len(labels) == 1 else f"_n{label}"
        if suffix:
            put(f"results{suffix}.csv", results_csv(rows))
        put(f"wide{suffix}.csv", wide_csv(rows, cfg))
        wide_files.append(f"wide{suffix}.csv")
    if cfg["model"]["kind"] == "spin" and "even_comb" in cfg["selectors"] and (
        len(labels) > 1 or cfg["output"]["figure_preset"] == "fig4"
    ):
        put("intensive.csv", intensive_csv(table))
    script = plot_script(cfg, wide_files)
    if script is not None:
        put("plot.gp", script)
    meta = {"package_version": __version__, "config": cfg, "exit_code": table.exit_code}
    put("run_meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return written


# ---------------------------------------------------------------- oracle verb


ORACLE_COLUMNS = (
    "lattice", "sweep_value", "selector", "gaussian", "fock", "fock_half_cutoff",
    "abs_diff", "converged", "energy_fock", "energy_modes",
)


def run_oracle(config, out_dir=None) -> tuple[int, str]:
    """Compare Gaussian and truncated-Fock entropies over the sweep; return (exit code, csv)."""
    cfg = resolve_config(config)
    if cfg["model"]["kind"] != "boson":
        raise ConfigError("the oracle verb needs a boson model")
    base = cfg["output"]["log_base"]
    oc = cfg["oracle"]
    tol = float(oc["tol"])
    records = []
    worst = 0
    for sizes in cfg["model"]["size_series"]:
        for value in sweep_grid(cfg["model"]["sweep"]):
            model = boson_model(cfg["model"], sizes, cfg["model"]["sweep"]["variable"], float(value))
            try:
                contractions = mode_contractions(model)
            except InstabilityError as exc:
                log.warning("skipping %s: %s", _num(value), exc)
                worst = max(worst, 3)
                continue
            e_modes = 0.5 * float(dispersion(model).omega.sum())
            for sel_text in cfg["selectors"]:
                g = subsystem_entropy(contractions, sel_text, base).entropy
                fres = truncated_ground_state_entropy(model, sel_text, int(oc["cutoff"]), base, tol)
                diff = abs(g - fres.entropy)
                if diff > tol or not fres.converged:
                    worst = 2
                records.append((
                    model.lattice.label(), _num(value), sel_text, _num(g), _num(fres.entropy),
                    _num(fres.entropy_half_cutoff), _num(diff), "true" if fres.converged else "false",
                    _num(fres.energy), _num(e_modes),
                ))
    text = _csv_text(ORACLE_COLUMNS, records)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "oracle.csv", text)
    return worst, text


__all__ = [
    "COLUMNS",
    "SweepRow",
    "SweepTable",
    "boson_model",
    "spin_model",
    "run_sweep",
    "emit_outputs",
    "results_csv",
    "wide_csv",
    "intensive_csv",
    "run_oracle",
]
