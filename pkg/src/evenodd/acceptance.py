"""Acceptance criteria as callable checks.

Every criterion returns a :class:`CriterionResult` made of individual
:class:`Check` items, each with the measured value, its threshold and a
verdict.  The pytest suite and ``evenodd check`` both run these.
"""
from __future__ import annotations

import math
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import integrate

from .asymptotics import (
    critical_divergence_law,
    elliptic_k,
    geometric_alpha,
    weak_coupling_predictions_dd,
    xy_block_entropy_infinite,
)
from .config import load_config
from .exact_spin import exact_ground_state, parity_projected_mean_field, reduced_entropy_exact
from .fock_oracle import truncated_ground_state_entropy
from .gaussian import (
    even_odd_entropy_folded,
    mode_contractions,
    subsystem_contraction_matrix,
    subsystem_entropy,
    symplectic_spectrum,
)
from .lattice import CouplingModel, LatticeSpec, critical_lambda
from .selectors import Block, EvenComb, Explicit, FullLattice, OddComb, SingleSite
from .spin import SpinModel
from .spin_rpa import factorized_side_limits, rpa_entropy
from .sweep import emit_outputs, run_sweep

SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: str
    passed: bool

    def line(self) -> str:
        return f"{'ok  ' if self.passed else 'FAIL'} {self.name}: {self.value:.6g} (want {self.threshold})"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else " | " + "; ".join(c.line()[5:] for c in self.failures())
        return f"{verdict} criterion {self.number}: {self.title} [{self.seconds:.1f}s]{tail}"

    def below(self, name, value, limit):
        self.checks.append(Check(name, float(value), f"<= {limit:g}", bool(value <= limit)))

    def above(self, name, value, limit):
        self.checks.append(Check(name, float(value), f"> {limit:g}", bool(value > limit)))

    def within(self, name, value, target, tol):
        ok = abs(value - target) <= tol
        self.checks.append(Check(name, float(value), f"{target:g} +- {tol:g}", bool(ok)))

    def holds(self, name, flag, value=math.nan):
        self.checks.append(Check(name, float(value), "true", bool(flag)))


def _rel(a, b):
    return abs(a - b) / abs(b)


# ------------------------------------------------------------------ 1


def _random_model(rng, sizes):
    lattice = LatticeSpec(sizes)
    plus, minus = {}, {}
    for axis in range(lattice.dims):
        for reach in (1, 2):
            if reach >= lattice.sizes[axis] // 2 + (reach == 1):
                continue
            key = [0] * lattice.dims
            key[axis] = reach
            a, b = rng.uniform(-0.6, 0.6, size=2) / reach
            plus[tuple(key)] = a
            plus[tuple(-v for v in key)] = a
            minus[tuple(key)] = b
            minus[tuple(-v for v in key)] = b
    model = CouplingModel(lattice, None, plus, minus)
    lam_c = critical_lambda(model).lambda_c
    return model.with_lambda(max(lam_c, 0.05) * rng.uniform(1.05, 3.0))


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "purity and symmetry on 20 random stable models")
    rng = np.random.default_rng(SEED)
    shapes = [(4,), (8,), (12,), (36,)] * 3 + [(2, 2), (4, 4), (2, 6), (4, 6), (6, 6), (6, 4), (6, 6), (4, 2)]
    worst_pure = worst_sym = worst_fold = 0.0
    for sizes in shapes:
        model = _random_model(rng, sizes)
        lattice = model.lattice
        cons = mode_contractions(model)
        full = symplectic_spectrum(subsystem_contraction_matrix(cons, FullLattice(), allow_full=True))
        worst_pure = max(worst_pure, float(np.max(np.abs(full))))
        pairs = [(SingleSite(), SingleSite().complement(lattice))]
        pairs.append((Block(lattice.sizes[-1] // 2), Block(lattice.sizes[-1] // 2).complement(lattice)))
        if lattice.all_even:
            pairs.append((EvenComb(), OddComb()))
        for a, b in pairs:
            sa = subsystem_entropy(cons, a).entropy
            sb = subsystem_entropy(cons, b).entropy
            worst_sym = max(worst_sym, abs(sa - sb))
        if lattice.all_even:
            generic = subsystem_entropy(cons, EvenComb()).entropy
            worst_fold = max(worst_fold, abs(generic - even_odd_entropy_folded(cons).entropy))
    res.below("max |full-lattice symplectic eigenvalue|", worst_pure, 1e-9)
    res.below("max |S(A) - S(complement)|", worst_sym, 1e-8)
    res.below("max |folded - generic even-comb entropy|", worst_fold, 1e-8)
    res.holds("20 models", len(shapes) == 20, len(shapes))
    return res


# ------------------------------------------------------------------ 2


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "truncated-Fock oracle reproduces Gaussian entropies")
    cases = [
        ("2 modes", CouplingModel((2,), 2.0, {}, {(1,): 0.5}), [SingleSite()]),
        (
            "3 modes",
            CouplingModel.first_neighbor((3,), 3.0, 0.5, 0.5),
            [SingleSite(), Explicit((0, 1))],
        ),
    ]
    for label, model, selectors in cases:
        cons = mode_contractions(model)
        for sel in selectors:
            gauss = subsystem_entropy(cons, sel).entropy
            fock = truncated_ground_state_entropy(model, sel, cutoff=30, tol=1e-6)
            res.below(f"{label} {sel.label}: |S_gauss - S_fock|", abs(gauss - fock.entropy), 1e-6)
            res.below(f"{label} {sel.label}: |S(30) - S(15)|", fock.drift, 1e-6)
    return res


# ------------------------------------------------------------------ 3


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "geometric factors alpha_1, alpha_2, alpha_3")
    a1 = geometric_alpha(d=1)
    a2 = geometric_alpha(d=2)
    a3 = geometric_alpha(d=3)
    res.within("alpha_1", a1, 1.0 - math.log(2.0), 1e-6)
    res.within("alpha_2", a2, 2.0 * a1, 1e-6)
    res.within("alpha_3", a3, 0.636, 0.01)
    return res


# ------------------------------------------------------------------ 4


def _weak_case(sizes, ratio, alpha_mode):
    model = CouplingModel.first_neighbor(sizes, None, 1.0, 1.0 / 3.0)
    lam = ratio * critical_lambda(model).lambda_c
    cons = mode_contractions(model.with_lambda(lam))
    block = Block(model.lattice.sizes[-1] // 2)
    exact = {
        "S_i": subsystem_entropy(cons, SingleSite()).entropy,
        "S_E": subsystem_entropy(cons, EvenComb()).entropy,
        "S_L": subsystem_entropy(cons, block).entropy,
    }
    pred = weak_coupling_predictions_dd(1.0, 1.0 / 3.0, lam, sizes, alpha_mode=alpha_mode)
    predicted = {"S_i": pred.single_site, "S_E": pred.even, "S_L": pred.block}
    return {k: _rel(predicted[k], exact[k]) for k in exact}


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "weak-coupling asymptotics in 1-d and 2-d")
    ratios = (10.0, 100.0, 1000.0)
    for sizes in ((36,), (6, 6)):
        tag = LatticeSpec(sizes).label()
        cont = [_weak_case(sizes, r, "continuum") for r in ratios]
        latt = [_weak_case(sizes, r, "lattice") for r in ratios]
        for key in ("S_i", "S_E", "S_L"):
            res.below(f"{tag} {key} rel. deviation at 10 lam_c", cont[0][key], 0.10)
            devs = latt if key == "S_E" else cont
            for lo, hi in ((0, 1), (1, 2)):
                shrink = devs[lo][key] / devs[hi][key]
                res.above(
                    f"{tag} {key} shrink {ratios[lo]:g}->{ratios[hi]:g} lam_c"
                    + (" (k-sum alpha)" if key == "S_E" else ""),
                    shrink,
                    5.0,
                )
        res.below(f"{tag} S_E rel. deviation at 10 lam_c (k-sum alpha)", latt[0]["S_E"], 0.10)
    for ratio in (10.0, 100.0):
        f = {}
        for sizes in ((36,), (6, 6)):
            model = CouplingModel.first_neighbor(sizes, None, 1.0, 1.0 / 3.0)
            lam = ratio * critical_lambda(model).lambda_c
            cons = mode_contractions(model.with_lambda(lam))
            f[len(sizes)] = float(subsystem_entropy(cons, SingleSite()).spectrum[0])
        res.within(f"f_2d / f_1d at {ratio:g} lam_c", f[2] / f[1], 0.5, 0.025)
    return res


def weak_coupling_continuum_rates() -> dict:
    """Per-decade shrink factors of the even-comb deviation with the continuum alpha."""
    out = {}
    for sizes in ((36,), (6, 6)):
        devs = [_weak_case(sizes, r, "continuum")["S_E"] for r in (10.0, 100.0, 1000.0)]
        out[LatticeSpec(sizes).label()] = (devs[0] / devs[1], devs[1] / devs[2])
    return out


# ------------------------------------------------------------------ 5


def criterion_5() -> CriterionResult:
    res = CriterionResult(5, "logarithmic divergence at the instability (n = 36)")
    model = CouplingModel.first_neighbor((36,), None, 1.0, 1.0 / 3.0)
    lam_c = critical_lambda(model).lambda_c
    excess = np.logspace(-6, -4, 9)
    series = {"S_E": [], "S_i": [], "S_L": []}
    selectors = {"S_E": EvenComb(), "S_i": SingleSite(), "S_L": Block(18)}

    def entropies(eps):
        cons = mode_contractions(model.with_lambda((1.0 + eps) * lam_c))
        return {k: subsystem_entropy(cons, s).entropy for k, s in selectors.items()}

    for eps in excess:
        for k, v in entropies(eps).items():
            series[k].append(v)
    for key in ("S_E", "S_i", "S_L"):
        slope, _ = critical_divergence_law(1.0 + excess, series[key])
        res.within(f"slope of {key} vs ln(lam/lam_c - 1)", slope, -0.25, 0.02)
    near = entropies(1e-8)
    res.within("S_E / S_i at lam/lam_c - 1 = 1e-8", near["S_E"] / near["S_i"], 1.0, 0.1)
    res.within("S_L / S_i at lam/lam_c - 1 = 1e-8", near["S_L"] / near["S_i"], 1.0, 0.1)
    return res


# ------------------------------------------------------------------ 6


def _elliptic_quad(k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2),
            0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-13, limit=200,
        )
    return val


def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "infinite-chain block entropy vs weak-coupling form")
    dp, dm = 1.0, 1.0 / 3.0
    lam = 100.0 * (dp + abs(dm))
    s_x = xy_block_entropy_infinite(lam, dp, dm)
    f = dm**2 / (8.0 * lam**2)
    s_lw = -f * (math.log(f / 2.0) - 1.0)
    res.below("relative |S_x - S_Lw| at lam = 100 (D+ + |D-|)", _rel(s_x, s_lw), 0.01)
    worst = max(abs(elliptic_k(k) - _elliptic_quad(k)) for k in (0.0, 0.1, 0.5, 0.9, 0.99, 0.999))
    res.below("max |I_agm(k) - I_quad(k)|", worst, 1e-9)
    return res


# ------------------------------------------------------------------ 7


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "factorizing field, n = 8, s = 1/2, chi = 1/2")
    base = SpinModel.first_neighbor((8,), 0.5, 0.0, 1.0, 0.5)
    b_s = base.b_s
    at_bs = base.with_field(b_s)
    gs = exact_ground_state(at_bs)
    for sel in (EvenComb(), Block(4)):
        minus_pred, plus_pred = factorized_side_limits(base, sel)
        got = {p: reduced_entropy_exact(gs.sectors[p].vector, sel, at_bs.lattice, 2) for p in (1, -1)}
        res.below(f"{sel.label} |S_ED(-) - S_Os(-)|", abs(got[-1] - minus_pred), 1e-6)
        res.below(f"{sel.label} |S_ED(+) - S_Os(+)|", abs(got[1] - plus_pred), 1e-6)
        minus_bits, plus_bits = factorized_side_limits(base, sel, 2)
        res.within(f"{sel.label} S(-) in bits", minus_bits, 1.0, 1e-3)
        res.within(f"{sel.label} S(+) in bits", plus_bits, 1.0, 0.2)
    theta = math.acos(b_s / base.b_c)
    for sign in (-1, 1):
        model = base.with_field(b_s * (1.0 + sign * 1e-3))
        g = exact_ground_state(model)
        ref = parity_projected_mean_field(model, theta, g.ground_parity)
        res.above(f"fidelity at B_s{'+' if sign > 0 else '-'}eps", abs(ref @ g.vector) ** 2, 0.999)
    return res


# ------------------------------------------------------------------ 8


def _ed_vs_rpa(model):
    g = exact_ground_state(model)
    d = int(round(2 * model.spin)) + 1
    s_ed = reduced_entropy_exact(g.vector, EvenComb(), model.lattice, d)
    s_rpa = rpa_entropy(model, EvenComb()).shifted
    return abs(s_ed - s_rpa) / s_rpa


def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "RPA becomes exact at strong field")
    base = SpinModel.first_neighbor((8,), 0.5, 0.0, 1.0, 0.5)
    devs = [_ed_vs_rpa(base.with_field(r * base.b_c)) for r in (10, 20, 40)]
    res.below("relative deviation at 10 B_c", devs[0], 0.05)
    res.holds("deviation shrinks 10 -> 20 B_c", devs[1] < devs[0], devs[1])
    res.holds("deviation shrinks 20 -> 40 B_c", devs[2] < devs[1], devs[2])
    trend = [_ed_vs_rpa(SpinModel.first_neighbor((6,), s, 2.0, 1.0, 0.5)) for s in (0.5, 1.0)]
    res.holds("n = 6, B = 2 B_c: deviation(s=1) < deviation(s=1/2)", trend[1] < trend[0], trend[1])
    return res


# ------------------------------------------------------------------ 9


def intensive_even_entropy(sizes=(4, 6, 8, 10), fields=None):
    """Base-2 even-comb entropy per even site on a field grid, one row per chain length."""
    fields = np.round(np.arange(0.02, 3.0 + 1e-9, 0.02), 10) if fields is None else fields
    out = np.empty((len(sizes), len(fields)))
    for i, n in enumerate(sizes):
        base = SpinModel.first_neighbor((n,), 0.5, 0.0, 1.0, 0.5)
        for j, b in enumerate(fields):
            model = base.with_field(b * base.b_c)
            vec = exact_ground_state(model).vector
            out[i, j] = reduced_entropy_exact(vec, EvenComb(), model.lattice, 2, 2) / (n / 2)
    return np.asarray(fields), out


def criterion_9() -> CriterionResult:
    res = CriterionResult(9, "intensive even-comb entropy, n = 4..10")
    sizes = (4, 6, 8, 10)
    fields, table = intensive_even_entropy(sizes)
    dplus = 0.5 * (1.0 + 0.5)
    strong = fields >= dplus - 1e-12
    spread = table[:, strong].max(axis=0) - table[:, strong].min(axis=0)
    res.below(f"max spread for B >= {dplus:g} B_c", spread.max(), 0.02)
    b_s = math.sqrt(0.5)
    low = fields < 0.8 * b_s
    shifted = {n: table[i] - 1.0 / (n / 2) for i, n in enumerate(sizes)}
    diff = np.abs(shifted[8] - shifted[10])[low]
    res.below("max |shifted n=8 - n=10| for B < 0.8 B_s", diff.max(), 0.05)
    return res


# ------------------------------------------------------------------ 10

ACCEPTANCE_CONFIGS = ("fig2_1d.toml", "fig2_2d.toml", "fig3.toml", "fig4.toml", "oracle.toml")


def config_path(name: str) -> Path:
    return Path(str(resources.files("evenodd") / "configs" / name))


def criterion_10() -> CriterionResult:
    res = CriterionResult(10, "byte-identical CSV on rerun")
    with tempfile.TemporaryDirectory() as tmp:
        for name in ACCEPTANCE_CONFIGS:
            cfg = load_config(config_path(name))
            blobs = []
            for attempt, workers in enumerate((1, 2)):
                cfg["output"]["workers"] = workers
                out = Path(tmp) / f"{name}-{attempt}"
                emit_outputs(run_sweep(cfg), out)
                blobs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv")) if p.name != "timings.csv"})
            same = blobs[0] == blobs[1] and bool(blobs[0])
            res.holds(f"{name}: identical CSV across reruns (1 and 2 workers)", same, len(blobs[0]))
    return res


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}
TIME_LIMITS = {1: 60.0, 2: 60.0, 3: 10.0, 7: 120.0, 9: 300.0}


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    result = CRITERIA[number]()
    result.seconds = time.perf_counter() - start
    if number in TIME_LIMITS:
        result.below("runtime seconds", result.seconds, TIME_LIMITS[number])
    return result
