"""Boson (RPA) description of XY spin arrays, with parity restoration.

For ``|B| >= B_c`` the spins fluctuate around the aligned state and the map
is ``lam = |B|``, ``D+-(l) = (J_x(l) +- J_y(l)) / 2``.  Below ``B_c`` the
mean field tilts by ``cos(theta) = |B| / B_c``, the boson model becomes
``lam = B_c``, ``D+-(l) = (J_x(l) cos^2(theta) +- J_y(l)) / 2``, and restoring
the broken S_z parity adds ``ln 2`` to subsystem entropies once the
mean-field overlaps are negligible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .exceptions import CriticalPointError, UnsupportedModelError
from .gaussian import EntropyResult, log_divisor, mode_contractions, subsystem_entropy
from .lattice import CouplingModel
from .selectors import as_selector
from .spin import SpinModel, side_limit_entropies

CRITICAL_WINDOW = 1e-6
FACTORIZING_TOL = 1e-9
OVERLAP_THRESHOLD = 0.05


@dataclass(frozen=True)
class RpaRegime:
    kind: str  # "normal", "broken" or "factorized"
    cos_theta: float = 1.0

    @property
    def theta(self) -> float:
        return math.acos(min(1.0, self.cos_theta))

    @property
    def parity_broken(self) -> bool:
        return self.kind != "normal"


def classify(spin: SpinModel) -> RpaRegime:
    b, b_c = abs(spin.field), spin.b_c
    if b_c <= 0:
        return RpaRegime("normal")
    if abs(b - b_c) < CRITICAL_WINDOW * b_c:
        raise CriticalPointError(
            f"|B| = {b:.12g} lies within {CRITICAL_WINDOW:g} B_c of B_c = {b_c:.12g}"
        )
    if b > b_c:
        return RpaRegime("normal")
    b_s = spin.b_s
    if b_s is not None and abs(b - b_s) < FACTORIZING_TOL * b_c:
        return RpaRegime("factorized", b_s / b_c)
    return RpaRegime("broken", b / b_c)


def rpa_boson_map(spin: SpinModel) -> tuple[CouplingModel, RpaRegime]:
    """Quadratic boson model equivalent to ``spin`` at the RPA level."""
    regime = classify(spin)
    jx, jy = spin.jx, spin.jy
    support = sorted(set(jx) | set(jy))
    if regime.kind == "normal":
        lam = abs(spin.field)
        c2 = 1.0
    else:
        if not spin.is_ferromagnetic_type():
            raise UnsupportedModelError(
                "broken-phase RPA needs |J_y(l)| <= J_x(l) for every displacement"
            )
        lam = spin.b_c
        c2 = regime.cos_theta**2
    plus = {l: 0.5 * (jx.get(l, 0.0) * c2 + jy.get(l, 0.0)) for l in support}
    if regime.kind == "factorized":
        minus = {}
    else:
        minus = {l: 0.5 * (jx.get(l, 0.0) * c2 - jy.get(l, 0.0)) for l in support}
    return CouplingModel(spin.lattice, lam, plus, minus), regime


def overlaps(spin: SpinModel, selector, regime: RpaRegime | None = None) -> tuple[float, float]:
    """Mean-field overlaps ``(O_A, O_Abar)`` for the selected subsystem."""
    regime = classify(spin) if regime is None else regime
    n_a = len(as_selector(selector).indices(spin.lattice))
    n_b = spin.lattice.n - n_a
    c = regime.cos_theta
    return spin.overlap(n_a, c), spin.overlap(n_b, c)


def rpa_entropy(spin: SpinModel, selector, base="e") -> EntropyResult:
    """Bosonic RPA entropy with parity-restoration bookkeeping.

    ``entropy`` is always the raw bosonic value.  In the broken phase the
    shift ``ln 2`` is applied when both overlaps are below 0.05; at the
    factorizing field it is always applied (the bosonic part vanishes).
    ``extras`` carries the overlaps and, when a factorizing field exists, the
    exact side-limit entropies at ``B_s`` for comparison.
    """
    sel = as_selector(selector)
    model, regime = rpa_boson_map(spin)
    result = subsystem_entropy(mode_contractions(model), sel, base)
    if regime.kind == "normal":
        return replace(result, extras={"regime": "normal"})
    o_a, o_b = overlaps(spin, sel, regime)
    delta = math.log(2.0) / log_divisor(base)
    applied = regime.kind == "factorized" or max(o_a, o_b) < OVERLAP_THRESHOLD
    extras = {"regime": regime.kind, "O_A": o_a, "O_Abar": o_b, "theta": regime.theta}
    if spin.b_s is not None:
        o_sa, o_sb = overlaps(spin, sel, RpaRegime("factorized", spin.b_s / spin.b_c))
        extras["side_limits"] = side_limit_entropies(o_sa, o_sb, base)
    return replace(result, shift=delta, shift_applied=applied, extras=extras)


def factorized_side_limits(spin: SpinModel, selector, base="e") -> tuple[float, float]:
    """Exact entropies ``(S^-, S^+)`` of the selected subsystem just below and above ``B_s``."""
    b_s = spin.b_s
    if b_s is None:
        raise UnsupportedModelError("no factorizing field: anisotropy must be common and in (0, 1)")
    o_a, o_b = overlaps(spin.with_field(b_s), selector, RpaRegime("factorized", b_s / spin.b_c))
    return side_limit_entropies(o_a, o_b, base)
