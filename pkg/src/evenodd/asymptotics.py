"""Closed-form weak-coupling, critical and thermodynamic-limit entropy formulas.

These are the fast predictions the exact Gaussian pipeline is checked against:

* weak coupling, first-neighbour chains and d-dimensional hypercubic arrays
  (single-site, even-comb and block entropies, all as functions of the
  single-site symplectic eigenvalue ``f``);
* the geometric factor ``alpha`` that fixes the even-comb entropy in d > 1;
* the logarithmic divergence law close to the instability;
* the infinite-chain block entropy of the spin-1/2 XY chain in terms of
  complete elliptic integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .exceptions import ConfigError, DomainError
from .gaussian import log_divisor
from .lattice import LatticeSpec

DEFAULT_RESOLUTION = 2**10


@dataclass(frozen=True)
class WeakCouplingPrediction:
    f: float
    single_site: float
    even: float
    block: float
    mutual: float
    alpha: float
    base: str = "e"


def _check_f(f):
    if not 0.0 <= f < 1.0:
        raise DomainError(f"weak-coupling expansion needs 0 <= f < 1, got f = {f:.4g}")


def _weak_single(f):
    return -f * (math.log(f) - 1.0) if f > 0 else 0.0


def weak_coupling_predictions_1d(delta_plus, delta_minus, lam, n, base="e", alpha_mode="continuum"):
    """Leading-order entropies of a first-neighbour ring of ``n`` sites.

    ``delta_plus`` does not enter at this order; it is accepted so call sites
    can pass the full parameter set.  With ``alpha_mode="lattice"`` the
    geometric factor is the ``n``-point k-sum instead of its continuum limit.
    """
    del delta_plus
    f = delta_minus**2 / (8.0 * lam**2)
    _check_f(f)
    alpha1 = _alpha_for([1.0], (n,), alpha_mode)
    if f == 0.0:
        return WeakCouplingPrediction(0.0, 0.0, 0.0, 0.0, 0.0, alpha1, _tag(base))
    s_i = _weak_single(f)
    s_e = -0.5 * n * f * (math.log(f) - 1.0 + alpha1)
    s_l = -f * (math.log(f / 2.0) - 1.0)
    mutual = 0.5 * n * s_i - s_e
    # the three leading-order forms are algebraically tied together
    scale = max(abs(s_e), 1e-300)
    assert abs(s_e - (0.5 * n * s_i - 0.5 * n * f * alpha1)) <= 1e-10 * scale
    if alpha_mode == "continuum":
        assert abs(s_e - (0.5 * n * s_l - 0.5 * n * f)) <= 1e-10 * scale
    div = log_divisor(base)
    return WeakCouplingPrediction(
        f, s_i / div, s_e / div, s_l / div, mutual / div, alpha1, _tag(base)
    )


def _tag(base):
    return "e" if log_divisor(base) == 1.0 else "2"


def _midpoint_alpha(weights: np.ndarray, resolution: int) -> tuple[float, float]:
    # cos(2 pi k) is symmetric about k = 1/2, so half of each axis suffices
    half = resolution // 2
    c = np.cos(2.0 * np.pi * (np.arange(half) + 0.5) / resolution)
    partial = np.zeros(1)
    for w in weights[:-1]:
        partial = (partial[:, None] + w * c[None, :]).ravel()
    total = norm = 0.0
    for cj in c:
        u = 2.0 * (partial + weights[-1] * cj) ** 2
        total += float(xlogy(u, u).sum())
        norm += float(u.sum())
    count = float(half) ** len(weights)
    return total / count, norm / count


def geometric_alpha(weights=None, d: int | None = None, resolution: int = DEFAULT_RESOLUTION):
    """Geometric entropy factor ``alpha = int u ln u d^d k`` over the unit cube.

    ``u(k) = 2 (sum_i w_i cos 2 pi k_i)^2`` with ``w = D-_i / |D-|``.  Pass the
    per-axis pairing couplings as ``weights`` or just ``d`` for the isotropic
    case.  Midpoint rule with ``resolution`` points per axis plus one
    Richardson step against ``resolution / 2`` (the midpoint error is
    ``O(h^3)`` because u ln u is only C^2 at the zeros of u).
    """
    if weights is None:
        if d is None or d < 1:
            raise ConfigError("geometric_alpha needs weights or a dimension d >= 1")
        weights = np.ones(d)
    weights = np.abs(np.asarray(weights, dtype=float).ravel())
    norm = np.linalg.norm(weights)
    if norm == 0.0:
        raise ConfigError("geometric_alpha needs at least one non-zero weight")
    if resolution < 8 or resolution % 4:
        raise ConfigError("resolution must be a multiple of 4 and >= 8")
    weights = weights / norm
    fine, unit = _midpoint_alpha(weights, resolution)
    coarse, _ = _midpoint_alpha(weights, resolution // 2)
    if abs(unit - 1.0) > 1e-8:
        raise AssertionError(f"u does not integrate to one ({unit!r})")
    return (8.0 * fine - coarse) / 7.0


def lattice_alpha(weights, sizes) -> float:
    """k-sum version of the geometric factor on a finite periodic array."""
    weights = np.abs(np.asarray(weights, dtype=float).ravel())
    sizes = tuple(int(s) for s in sizes)
    if weights.size != len(sizes):
        raise ConfigError("one weight per axis is required")
    weights = weights / np.linalg.norm(weights)
    grids = np.meshgrid(*[np.arange(s) / s for s in sizes], indexing="ij")
    u = 2.0 * sum(w * np.cos(2.0 * np.pi * g) for w, g in zip(weights, grids)) ** 2
    return float(xlogy(u, u).mean())


def _alpha_for(weights, sizes, mode, resolution=DEFAULT_RESOLUTION):
    if mode == "lattice":
        return lattice_alpha(weights, sizes)
    if mode != "continuum":
        raise ConfigError(f"alpha_mode must be 'continuum' or 'lattice', got {mode!r}")
    if len(sizes) == 1:
        return 1.0 - math.log(2.0)
    return geometric_alpha(weights, resolution=resolution)


def weak_coupling_predictions_dd(
    delta_plus, delta_minus, lam, lattice: LatticeSpec | Sequence[int], base="e",
    resolution: int = DEFAULT_RESOLUTION, alpha_mode: str = "continuum",
):
    """Leading-order entropies for first-neighbour couplings on a d-dimensional array.

    ``delta_plus`` / ``delta_minus`` are per-axis couplings (scalars broadcast).
    The block prediction is for the slab that is full along every axis but the
    last and half-size along the last one; it has ``2 n_perp`` broken bonds,
    each contributing one symplectic eigenvalue ``(D-_last)^2 / (16 lam^2)``.
    ``alpha_mode="lattice"`` uses the k-sum over the actual array for the
    geometric factor, removing the finite-size floor of the even prediction.
    """
    if not isinstance(lattice, LatticeSpec):
        lattice = LatticeSpec(tuple(np.atleast_1d(lattice)))
    d = lattice.dims
    dm = np.broadcast_to(np.asarray(delta_minus, dtype=float), (d,))
    del delta_plus
    norm2 = float(np.sum(dm**2))
    f = norm2 / (8.0 * lam**2)
    _check_f(f)
    n = lattice.n
    if f == 0.0:
        return WeakCouplingPrediction(0.0, 0.0, 0.0, 0.0, 0.0, float("nan"), _tag(base))
    alpha = _alpha_for(dm, lattice.sizes, alpha_mode, resolution)
    s_i = _weak_single(f)
    s_e = -0.5 * n * f * (math.log(f) - 1.0 + alpha)
    per_bond = float(dm[-1]) ** 2 / (16.0 * lam**2)
    n_perp = n // lattice.sizes[-1]
    s_l = 2 * n_perp * _weak_single(per_bond)
    mutual = 0.5 * n * s_i - s_e
    div = log_divisor(base)
    return WeakCouplingPrediction(
        f, s_i / div, s_e / div, s_l / div, mutual / div, alpha, _tag(base)
    )


def isotropic_f(ratio: float, lambda_ratio: float, d: int) -> float:
    """``f`` at fixed ``lam / lam_c`` for isotropic first-neighbour couplings.

    ``ratio`` is ``D- / D+``.
    """
    x = abs(ratio) / (1.0 + abs(ratio))
    return x**2 / (8.0 * d * lambda_ratio**2)


def critical_divergence_law(lambda_ratios, entropies) -> tuple[float, float]:
    """Least-squares slope and intercept of ``S`` against ``ln(lam / lam_c - 1)``."""
    x = np.asarray(lambda_ratios, dtype=float) - 1.0
    y = np.asarray(entropies, dtype=float)
    if x.size != y.size:
        raise ConfigError("grid and entropies differ in length")
    if x.size < 3:
        raise ConfigError("critical_divergence_law needs at least three points")
    if np.any(x <= 0):
        raise DomainError("every lam / lam_c must exceed one")
    slope, intercept = np.polyfit(np.log(x), y, 1)
    return float(slope), float(intercept)


def agm(a: float, b: float, rtol: float = 1e-15) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if a <= 0 or b <= 0:
        raise DomainError("agm needs positive arguments")
    for _ in range(100):
        a_next, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a_next - a) <= rtol * a_next and abs(a_next - b) <= rtol * a_next:
            return a_next
        a = a_next
    return a


def elliptic_k(modulus: float) -> float:
    """``I(k) = int_0^1 dx / sqrt((1 - x^2)(1 - k^2 x^2))`` for ``0 <= k < 1``."""
    if not 0.0 <= abs(modulus) < 1.0:
        raise DomainError(f"elliptic modulus must lie in [0, 1), got {modulus!r}")
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - modulus) * (1.0 + modulus))))


def xy_block_entropy_infinite(lam, delta_plus, delta_minus, base="e") -> float:
    """Half-infinite block entropy of the infinite spin-1/2 XY chain in a transverse field."""
    if not lam > delta_plus:
        raise DomainError("formula holds only for lam > D+")
    dm = abs(delta_minus)
    if dm == 0.0:
        return 0.0
    a = dm / math.sqrt(lam**2 + dm**2 - delta_plus**2)
    ap = math.sqrt((1.0 - a) * (1.0 + a))
    value = (
        math.log(4.0 / (a * ap))
        + (a * a - ap * ap) * 2.0 * elliptic_k(a) * elliptic_k(ap) / math.pi
    ) / 6.0
    return value / log_divisor(base)
