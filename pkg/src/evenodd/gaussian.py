"""Ground-state contractions and entanglement entropies of quadratic boson lattices.

The reduced state of any site subset A is Gaussian and fixed by the
contraction matrix

    D_A = [[F+,        F-      ],
           [conj(F-),  I + conj(F+)]],   F+_ij = <b_j^dag b_i>,  F-_ij = <b_j b_i>

whose symplectic eigenvalues (the non-negative eigenvalues of D_A M_A with
M = diag(I, -I)) give S(A) = sum_j h(f_j).  All couplings are symmetric, so
every contraction is real and the code works in real arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .exceptions import ConfigError, DomainError, NumericalDegeneracyError
from .lattice import CouplingModel, LatticeSpec, ModeData, dispersion
from .selectors import EvenComb, Selector, SingleSite, as_selector

CLAMP_TOL = 1e-10
PAIRING_TOL = 1e-8
IMAG_TOL = 1e-9
_SERIES_BELOW = 1e-14


def log_divisor(base) -> float:
    """Divisor turning nats into the requested base (``'e'`` or ``2``)."""
    if base in (None, "e", math.e):
        return 1.0
    if base in (2, 2.0, "2"):
        return math.log(2.0)
    raise ConfigError(f"unsupported log base {base!r}; use 'e' or 2")


def base_tag(base) -> str:
    return "e" if log_divisor(base) == 1.0 else "2"


def entropy_h(f, base="e"):
    """Entropy of one thermal-like mode with occupation ``f``.

    ``h(f) = -f ln f + (1 + f) ln(1 + f)``; values in ``[-1e-10, 0)`` are
    treated as rounding noise and clamped to zero.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < -CLAMP_TOL) or np.any(np.isnan(f)):
        raise DomainError(f"h(f) needs f >= 0, got min {np.nanmin(f)!r}")
    f = np.clip(f, 0.0, None)
    tiny = f < _SERIES_BELOW
    safe = np.where(tiny, 1.0, f)
    exact = -xlogy(safe, safe) + (1.0 + safe) * np.log1p(safe)
    series = f * (1.0 - np.log(np.where(f > 0, f, 1.0))) + 0.5 * f * f
    out = np.where(tiny, np.where(f > 0, series, 0.0), exact) / log_divisor(base)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ModeContractions:
    """Per-k occupations ``f+_k``, pairings ``f-_k`` and their real-space transforms.

    ``F_plus`` and ``F_minus`` are flat arrays indexed by the flat index of the
    (reduced) displacement vector.
    """

    model: CouplingModel
    modes: ModeData
    f_plus: np.ndarray
    f_minus: np.ndarray
    F_plus: np.ndarray
    F_minus: np.ndarray

    @property
    def lattice(self) -> LatticeSpec:
        return self.model.lattice

    def symplectic_per_k(self) -> np.ndarray:
        """``sqrt((1/2 + f+_k)^2 - (f-_k)^2) - 1/2``, zero for a pure state."""
        return _single_mode_f(self.f_plus, self.f_minus)


def _single_mode_f(fp, fm):
    fp = np.asarray(fp, dtype=float)
    fm = np.asarray(fm, dtype=float)
    a = 0.5 + fp
    # difference of squares in factorized form
    return np.sqrt(np.clip((a - np.abs(fm)) * (a + np.abs(fm)), 0.0, None)) - 0.5


def _real_space(lattice: LatticeSpec, per_k: np.ndarray) -> np.ndarray:
    grid = np.fft.fftn(per_k.reshape(lattice.sizes)) / lattice.n
    scale = max(1.0, float(np.max(np.abs(per_k))))
    if np.max(np.abs(grid.imag)) > 1e-10 * scale:
        raise NumericalDegeneracyError("real-space contraction picked up an imaginary part")
    return grid.real.ravel()


def mode_contractions(model: CouplingModel) -> ModeContractions:
    """Ground-state contractions of a stable model.

    ``f+_k = (lam - D+_k) / (2 w_k) - 1/2`` and ``f-_k = D-_k / (2 w_k)``; the
    former is evaluated as ``(D-_k)^2 / (2 w_k (lam - D+_k + w_k))`` so it
    stays accurate at weak coupling.
    """
    modes = dispersion(model)
    a = model.lam - modes.delta_plus_k
    w = modes.omega
    f_plus = modes.delta_minus_k**2 / (2.0 * w * (a + w))
    f_minus = modes.delta_minus_k / (2.0 * w)
    return ModeContractions(
        model=model,
        modes=modes,
        f_plus=f_plus,
        f_minus=f_minus,
        F_plus=_real_space(model.lattice, f_plus),
        F_minus=_real_space(model.lattice, f_minus),
    )


@dataclass(frozen=True)
class ContractionMatrix:
    """Restriction of the contraction matrix to a site subset."""

    sites: np.ndarray
    F_plus: np.ndarray
    F_minus: np.ndarray

    @property
    def m(self) -> int:
        return len(self.sites)

    @property
    def matrix(self) -> np.ndarray:
        eye = np.eye(self.m)
        return np.block(
            [[self.F_plus, self.F_minus], [self.F_minus.conj(), eye + self.F_plus.conj()]]
        )

    @property
    def metric(self) -> np.ndarray:
        return np.diag(np.r_[np.ones(self.m), -np.ones(self.m)])


def subsystem_contraction_matrix(
    contractions: ModeContractions, selector, allow_full: bool = False
) -> ContractionMatrix:
    """Entries ``F+-_ij = F+-_{i-j}`` for sites i, j of the selected subset."""
    lattice = contractions.lattice
    sites = as_selector(selector).indices(lattice, allow_full=allow_full)
    disp = lattice.displacement_index(sites, sites)
    return ContractionMatrix(
        sites=sites, F_plus=contractions.F_plus[disp], F_minus=contractions.F_minus[disp]
    )


def symplectic_spectrum(cm: ContractionMatrix) -> np.ndarray:
    """Symplectic eigenvalues of ``D_A``, sorted in descending order.

    The eigenvalues of ``D_A M_A`` must split into pairs ``{f, -1 - f}``; the
    split is verified and any mismatch above 1e-8 (relative for f > 1) raises
    :class:`NumericalDegeneracyError`.
    """
    m = cm.m
    vals = np.linalg.eigvals(cm.matrix @ cm.metric)
    scale = np.maximum(1.0, np.abs(vals))
    if np.any(np.abs(vals.imag) > IMAG_TOL * scale):
        raise NumericalDegeneracyError(
            f"D_A M_A has complex eigenvalues (max imag {np.max(np.abs(vals.imag)):.2e})"
        )
    vals = np.sort(vals.real)
    upper, lower = vals[vals > -0.5], vals[vals <= -0.5]
    if len(upper) != m or len(lower) != m:
        raise NumericalDegeneracyError(
            f"eigenvalues of D_A M_A do not split into {m} + {m} (got {len(upper)} + {len(lower)})"
        )
    partner = np.sort(-1.0 - lower)
    mismatch = np.abs(upper - partner) / np.maximum(1.0, upper)
    if np.max(mismatch) > PAIRING_TOL:
        raise NumericalDegeneracyError(
            f"symplectic pairing violated by {np.max(mismatch):.2e}"
        )
    f = 0.5 * (upper + partner)
    if np.any(f < -CLAMP_TOL):
        raise NumericalDegeneracyError(f"negative symplectic eigenvalue {f.min():.3e}")
    return np.clip(f, 0.0, None)[::-1]


@dataclass(frozen=True)
class EntropyResult:
    """Entropy of one subsystem plus the data needed to audit it."""

    entropy: float
    spectrum: np.ndarray
    base: str = "e"
    selector: str = ""
    shift: float = 0.0
    shift_applied: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def raw(self) -> float:
        return self.entropy

    @property
    def shifted(self) -> float:
        return self.entropy + (self.shift if self.shift_applied else 0.0)

    def spectrum_head(self, count: int = 3) -> np.ndarray:
        return np.asarray(self.spectrum)[:count]


def subsystem_entropy(contractions: ModeContractions, selector, base="e") -> EntropyResult:
    """``S(rho_A) = sum_j h(f_j^A)`` for an arbitrary site subset."""
    sel = as_selector(selector)
    spec = symplectic_spectrum(subsystem_contraction_matrix(contractions, sel))
    return EntropyResult(
        entropy=float(np.sum(entropy_h(spec, base))),
        spectrum=spec,
        base=base_tag(base),
        selector=sel.label,
    )


def folded_even_spectrum(contractions: ModeContractions) -> np.ndarray:
    """Per-k symplectic eigenvalues of the even comb, one value for every k of the full grid.

    Each value appears twice (k and k + n/2 fold together).
    """
    lattice = contractions.lattice
    lattice.require_even()
    shift = lattice.half_shift()
    fp = 0.5 * (contractions.f_plus + contractions.f_plus[shift])
    fm = 0.5 * (contractions.f_minus + contractions.f_minus[shift])
    return np.clip(_single_mode_f(fp, fm), 0.0, None)


def even_odd_entropy_folded(contractions: ModeContractions, base="e") -> EntropyResult:
    """Even-comb entropy from the folded k-space spectrum, ``S = 1/2 sum_k h(f~_k)``."""
    ft = folded_even_spectrum(contractions)
    entropy = 0.5 * float(np.sum(entropy_h(ft, base)))
    # keep one copy of every folded pair for the reported spectrum
    lattice = contractions.lattice
    keep = np.arange(lattice.n) < lattice.half_shift()
    return EntropyResult(
        entropy=entropy,
        spectrum=np.sort(ft[keep])[::-1],
        base=base_tag(base),
        selector=EvenComb.label,
    )


def even_mutual_entropy(contractions: ModeContractions, base="e") -> float:
    """``(n/2) S(rho_i) - S(rho_E)``; never negative (subadditivity)."""
    n = contractions.lattice.n
    s_i = subsystem_entropy(contractions, SingleSite(0), base).entropy
    s_e = even_odd_entropy_folded(contractions, base).entropy
    mutual = 0.5 * n * s_i - s_e
    if mutual < -1e-9 * max(1.0, abs(s_e)):
        raise NumericalDegeneracyError(f"negative even mutual entropy {mutual:.3e}")
    return max(mutual, 0.0)


def entropy(model: CouplingModel, selector: Selector | str, base="e") -> EntropyResult:
    """One-shot convenience: contractions of ``model`` then the subsystem entropy."""
    return subsystem_entropy(mode_contractions(model), selector, base)
