"""Anisotropic XY spin-s arrays in a transverse field.

    H = B sum_i s_iz - (1 / 2s) sum_{i != j} [J_x(i - j) s_ix s_jx + J_y(i - j) s_iy s_jy]

The double sum runs over ordered pairs.  First-neighbour couplings are stored
as ``J(+-e_i) = J_i / 2`` so that ``B_c = sum_l J_x(l) = J_x`` for a chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .exceptions import ConfigError
from .lattice import LatticeSpec, _normalize_couplings

_CHI_RTOL = 1e-12


@dataclass(frozen=True)
class SpinModel:
    """Spin model parameters plus the derived mean-field quantities."""

    lattice: LatticeSpec
    spin: float
    field: float
    j_x: Mapping | Iterable = field(default_factory=dict)
    j_y: Mapping | Iterable = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.lattice, LatticeSpec):
            object.__setattr__(self, "lattice", LatticeSpec(self.lattice))
        two_s = 2.0 * float(self.spin)
        if two_s < 1 or abs(two_s - round(two_s)) > 1e-12:
            raise ConfigError(f"spin must be a positive multiple of 1/2, got {self.spin!r}")
        object.__setattr__(self, "spin", round(two_s) / 2.0)
        object.__setattr__(self, "field", float(self.field))
        for name in ("j_x", "j_y"):
            object.__setattr__(
                self, name, _normalize_couplings(self.lattice, getattr(self, name), name)
            )

    @classmethod
    def first_neighbor(cls, lattice, spin, field, j_x, j_y) -> "SpinModel":
        if not isinstance(lattice, LatticeSpec):
            lattice = LatticeSpec(lattice)
        jx = np.broadcast_to(np.asarray(j_x, dtype=float), (lattice.dims,))
        jy = np.broadcast_to(np.asarray(j_y, dtype=float), (lattice.dims,))
        xs, ys = [], []
        for axis in range(lattice.dims):
            e = np.zeros(lattice.dims, dtype=int)
            e[axis] = 1
            for sign in (1, -1):
                xs.append((tuple(sign * e), jx[axis] / 2))
                ys.append((tuple(sign * e), jy[axis] / 2))
        return cls(lattice, spin, field, xs, ys)

    def with_field(self, field) -> "SpinModel":
        return SpinModel(self.lattice, self.spin, field, self.j_x, self.j_y)

    def with_spin(self, spin) -> "SpinModel":
        return SpinModel(self.lattice, spin, self.field, self.j_x, self.j_y)

    @property
    def jx(self) -> dict:
        return dict(self.j_x)

    @property
    def jy(self) -> dict:
        return dict(self.j_y)

    def _support(self):
        return sorted(set(self.jx) | set(self.jy))

    @property
    def delta_plus(self) -> dict:
        jx, jy = self.jx, self.jy
        return {l: 0.5 * (jx.get(l, 0.0) + jy.get(l, 0.0)) for l in self._support()}

    @property
    def delta_minus(self) -> dict:
        jx, jy = self.jx, self.jy
        return {l: 0.5 * (jx.get(l, 0.0) - jy.get(l, 0.0)) for l in self._support()}

    @property
    def b_c(self) -> float:
        return float(sum(v for _, v in self.j_x))

    @property
    def chi(self) -> float | None:
        """Common anisotropy ``J_y(l) / J_x(l)``, or None if it varies with l."""
        jx, jy = self.jx, self.jy
        ratios = []
        for l in self._support():
            x = jx.get(l, 0.0)
            if x == 0.0:
                return None
            ratios.append(jy.get(l, 0.0) / x)
        if not ratios:
            return None
        if max(ratios) - min(ratios) > _CHI_RTOL * max(1.0, abs(ratios[0])):
            return None
        return ratios[0]

    @property
    def b_s(self) -> float | None:
        """Transverse factorizing field ``B_c sqrt(chi)``; None unless chi in (0, 1)."""
        chi = self.chi
        if chi is None or not 0.0 < chi < 1.0:
            return None
        return self.b_c * math.sqrt(chi)

    @property
    def cos_theta(self) -> float:
        return min(abs(self.field) / self.b_c, 1.0) if self.b_c > 0 else 1.0

    @property
    def theta(self) -> float:
        return math.acos(self.cos_theta)

    def is_ferromagnetic_type(self) -> bool:
        jx, jy = self.jx, self.jy
        return all(abs(jy.get(l, 0.0)) <= jx.get(l, 0.0) + 1e-15 for l in self._support())

    def overlap(self, n_sites: int, cos_theta: float | None = None) -> float:
        """Mean-field overlap ``<-Theta|Theta>`` restricted to ``n_sites`` sites."""
        c = self.cos_theta if cos_theta is None else cos_theta
        return c ** (2.0 * n_sites * self.spin)


def spin_matrices(spin: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(s_z, s_+, s_-)`` in the basis m = -s, ..., s (index ``m + s``)."""
    dim = int(round(2 * spin)) + 1
    m = np.arange(dim) - spin
    sz = np.diag(m)
    sp = np.zeros((dim, dim))
    for a in range(dim - 1):
        sp[a + 1, a] = math.sqrt(spin * (spin + 1) - m[a] * (m[a] + 1))
    return sz, sp, sp.T.copy()


def side_limit_entropies(o_a: float, o_abar: float, base="e") -> tuple[float, float]:
    """Entropies of the two definite-parity mean-field combinations at B_s.

    Returns ``(S^-, S^+)`` for negative and positive parity, built from the
    subsystem and complement overlaps.  A combination that vanishes
    identically (both overlaps equal to one, negative parity) gives NaN.
    """
    from .gaussian import log_divisor

    out = []
    for sign in (-1.0, 1.0):
        denom = 2.0 * (1.0 + sign * o_a * o_abar)
        if denom <= 1e-300:
            out.append(math.nan)
            continue
        total = 0.0
        for nu in (1.0, -1.0):
            q = (1.0 + nu * o_a) * (1.0 + sign * nu * o_abar) / denom
            if q > 0.0:
                total -= q * math.log(q)
        out.append(total / log_divisor(base))
    return out[0], out[1]
