"""Cyclic d-dimensional lattices with translationally invariant quadratic couplings.

Sites and wave vectors are both stored in lexicographic order of their integer
coordinates, so flat index ``i`` of a site and flat index ``k`` of a mode are
obtained with :func:`numpy.ravel_multi_index` on ``lattice.sizes``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import (
    ConfigError,
    InstabilityError,
    NumericalDegeneracyError,
    SymmetryError,
)

STABILITY_MARGIN = 1e-10
_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Cyclic lattice of ``prod(sizes)`` sites."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.sizes))
        if len(sizes) < 1:
            raise ConfigError("lattice needs at least one dimension")
        if any(s < 2 for s in sizes):
            raise ConfigError(f"every lattice size must be >= 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def dims(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def all_even(self) -> bool:
        return all(s % 2 == 0 for s in self.sizes)

    def require_even(self):
        if not self.all_even:
            raise ConfigError(
                f"even-odd partition needs every lattice size even, got {self.sizes}"
            )

    def sites(self) -> np.ndarray:
        """Integer coordinates of all sites, shape (n, d), lexicographic."""
        grids = np.meshgrid(*[np.arange(s) for s in self.sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    # the k-grid has the same integer structure as the site grid
    k_grid = sites

    def reduce(self, vec) -> tuple[int, ...]:
        vec = np.atleast_1d(np.asarray(vec, dtype=int))
        if vec.shape != (self.dims,):
            raise ConfigError(
                f"vector {tuple(vec.tolist())} does not match lattice dimension {self.dims}"
            )
        return tuple(int(v) for v in np.mod(vec, self.sizes))

    def mirror(self, vec) -> tuple[int, ...]:
        return self.reduce(-np.asarray(vec, dtype=int))

    def flat_index(self, coords) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=int))
        return np.ravel_multi_index(tuple(np.mod(coords, self.sizes).T), self.sizes)

    def coords(self, flat) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(flat, dtype=int), self.sizes), axis=-1)

    def displacement_index(self, rows, cols) -> np.ndarray:
        """Flat index of the reduced displacement ``site_i - site_j`` for all pairs."""
        ci = self.coords(rows)
        cj = self.coords(cols)
        diff = np.mod(ci[:, None, :] - cj[None, :, :], self.sizes)
        return np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), self.sizes)

    def site_parity(self) -> np.ndarray:
        """+1 on sites with even coordinate sum, -1 elsewhere."""
        return np.where(self.sites().sum(axis=1) % 2 == 0, 1, -1)

    def half_shift(self) -> np.ndarray:
        """Flat index of ``k + n/2`` (componentwise, mod n_i) for every flat k."""
        self.require_even()
        shifted = np.mod(self.k_grid() + np.array(self.sizes) // 2, self.sizes)
        return self.flat_index(shifted)

    def label(self) -> str:
        return "x".join(str(s) for s in self.sizes)


def _normalize_couplings(lattice: LatticeSpec, raw, name: str) -> tuple:
    """Reduce displacement keys mod the lattice, accumulate duplicates, check symmetry."""
    items = raw.items() if isinstance(raw, Mapping) else raw
    acc: dict[tuple[int, ...], float] = {}
    for key, value in items:
        value = float(value)
        if not np.isfinite(value):
            raise ConfigError(f"{name} coupling at {key!r} is not finite")
        red = lattice.reduce(key)
        if not any(red):
            raise ConfigError(f"{name} coupling at zero displacement is not allowed")
        acc[red] = acc.get(red, 0.0) + value
    acc = {k: v for k, v in acc.items() if v != 0.0}
    scale = sum(abs(v) for v in acc.values()) or 1.0
    for key, value in acc.items():
        mirror_value = acc.get(lattice.mirror(key), 0.0)
        if abs(value - mirror_value) > 1e-12 * scale:
            raise SymmetryError(key, value, mirror_value)
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class CouplingModel:
    """Quadratic boson lattice: diagonal energy ``lam`` and couplings D+(l), D-(l).

    ``delta_plus`` and ``delta_minus`` map a displacement vector (or an int in
    one dimension) to the coupling of every ordered site pair at that
    separation.  Keys are reduced mod the lattice sizes and entries landing on
    the same reduced displacement are summed.
    """

    lattice: LatticeSpec
    lam: float | None
    delta_plus: Mapping | Iterable = field(default_factory=dict)
    delta_minus: Mapping | Iterable = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.lattice, LatticeSpec):
            object.__setattr__(self, "lattice", LatticeSpec(self.lattice))
        if self.lam is not None:
            lam = float(self.lam)
            if not np.isfinite(lam):
                raise ConfigError("lambda must be finite")
            object.__setattr__(self, "lam", lam)
        for name in ("delta_plus", "delta_minus"):
            object.__setattr__(
                self, name, _normalize_couplings(self.lattice, getattr(self, name), name)
            )

    @classmethod
    def first_neighbor(cls, lattice, lam, delta_plus, delta_minus) -> "CouplingModel":
        """Nearest-neighbour couplings ``D(+-e_i) = D_i / 2`` per axis.

        Scalars are broadcast to every axis.
        """
        if not isinstance(lattice, LatticeSpec):
            lattice = LatticeSpec(lattice)
        dp = np.broadcast_to(np.asarray(delta_plus, dtype=float), (lattice.dims,))
        dm = np.broadcast_to(np.asarray(delta_minus, dtype=float), (lattice.dims,))
        plus, minus = [], []
        for axis in range(lattice.dims):
            e = np.zeros(lattice.dims, dtype=int)
            e[axis] = 1
            for sign in (1, -1):
                plus.append((tuple(sign * e), dp[axis] / 2))
                minus.append((tuple(sign * e), dm[axis] / 2))
        return cls(lattice, lam, plus, minus)

    def with_lambda(self, lam) -> "CouplingModel":
        return CouplingModel(self.lattice, lam, self.delta_plus, self.delta_minus)

    @property
    def plus(self) -> dict:
        return dict(self.delta_plus)

    @property
    def minus(self) -> dict:
        return dict(self.delta_minus)

    def real_space_matrix(self, which: str) -> np.ndarray:
        """Dense n x n matrix ``D_ij = D(i - j)`` (``which`` is 'plus' or 'minus')."""
        lat = self.lattice
        table = np.zeros(lat.sizes)
        for key, value in (self.delta_plus if which == "plus" else self.delta_minus):
            table[key] = value
        idx = np.arange(lat.n)
        return table.ravel()[lat.displacement_index(idx, idx)]

    def is_first_neighbor_only(self) -> bool:
        for key, _ in self.delta_plus + self.delta_minus:
            steps = [min(v, s - v) for v, s in zip(key, self.lattice.sizes)]
            if sum(steps) != 1:
                return False
        return True

    def sign_gauged(self) -> "CouplingModel":
        """Apply ``b_i -> -b_i`` on odd sites: flips couplings on odd displacements."""
        self.lattice.require_even()

        def flip(items):
            return [(k, -v if sum(k) % 2 else v) for k, v in items]

        return CouplingModel(
            self.lattice, self.lam, flip(self.delta_plus), flip(self.delta_minus)
        )


@dataclass(frozen=True)
class ModeData:
    """Per-k couplings and dispersion, flat arrays in lexicographic k order."""

    lattice: LatticeSpec
    delta_plus_k: np.ndarray
    delta_minus_k: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class StabilityVerdict:
    lambda_c: float
    critical_k: tuple[int, ...]
    lam: float | None
    margin: float | None
    stable: bool | None
    attractive: bool
    gauge_flipped: bool
    closed_form_lambda_c: float | None


def _fourier(lattice: LatticeSpec, items) -> np.ndarray:
    k = lattice.k_grid() / np.array(lattice.sizes, dtype=float)
    out = np.zeros(lattice.n, dtype=complex)
    scale = 0.0
    for key, value in items:
        out += value * np.exp(2j * np.pi * (k @ np.array(key, dtype=float)))
        scale += abs(value)
    if scale and np.max(np.abs(out.imag)) > _IMAG_TOL * scale:
        kbad = tuple(int(v) for v in lattice.coords(int(np.argmax(np.abs(out.imag)))))
        raise NumericalDegeneracyError(f"Fourier coupling at k={kbad} is not real")
    return out.real.copy()


def fourier_couplings(model: CouplingModel) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(D+_k, D-_k)`` by direct summation over the coupling support."""
    return _fourier(model.lattice, model.delta_plus), _fourier(model.lattice, model.delta_minus)


def critical_lambda(model: CouplingModel, lam: float | None = None) -> StabilityVerdict:
    """Stability threshold ``max_k (D+_k + |D-_k|)`` and the verdict at ``lam``.

    For attractive couplings (all D+ >= 0, D- of one sign) the threshold is
    attained at k = 0 and equals ``sum_l D+(l) + |D-(l)|``; that value is also
    reported as ``closed_form_lambda_c``.  When D+ is negative on a first-neighbour
    bipartite lattice the odd-site sign gauge is applied first.
    """
    lam = model.lam if lam is None else float(lam)
    gauge_flipped = False
    work = model
    if (
        model.lattice.all_even
        and model.is_first_neighbor_only()
        and any(v < 0 for _, v in model.delta_plus)
        and all(v <= 0 for _, v in model.delta_plus)
    ):
        work = model.sign_gauged()
        gauge_flipped = True
    dp, dm = fourier_couplings(work)
    load = dp + np.abs(dm)
    kc = int(np.argmax(load))
    plus_vals = [v for _, v in work.delta_plus]
    minus_vals = [v for _, v in work.delta_minus]
    attractive = all(v >= 0 for v in plus_vals) and (
        all(v >= 0 for v in minus_vals) or all(v <= 0 for v in minus_vals)
    )
    closed_lc = sum(plus_vals) + abs(sum(minus_vals)) if attractive else None
    lambda_c = float(load[kc])
    margin = stable = None
    if lam is not None:
        margin = float(lam - lambda_c)
        stable = bool(margin > STABILITY_MARGIN * abs(lam)) and lam > 0
    return StabilityVerdict(
        lambda_c=lambda_c,
        critical_k=tuple(int(v) for v in model.lattice.coords(kc)),
        lam=lam,
        margin=margin,
        stable=stable,
        attractive=attractive,
        gauge_flipped=gauge_flipped,
        closed_form_lambda_c=closed_lc,
    )


def dispersion(model: CouplingModel) -> ModeData:
    """Normal-mode energies ``w_k = sqrt((lam - D+_k)^2 - (D-_k)^2)``."""
    if model.lam is None:
        raise ConfigError("dispersion needs a value for lambda")
    lam = model.lam
    dp, dm = fourier_couplings(model)
    a = lam - dp
    gap = a - np.abs(dm)
    kmin = int(np.argmin(gap))
    if not gap[kmin] > STABILITY_MARGIN * abs(lam):
        k = tuple(int(v) for v in model.lattice.coords(kmin))
        raise InstabilityError(
            f"model unstable at k={k}: lam - D+_k - |D-_k| = {gap[kmin]:.3e}",
            k=k,
            margin=float(gap[kmin]),
        )
    # factorized form avoids cancellation close to the instability
    omega = np.sqrt(gap * (a + np.abs(dm)))
    return ModeData(model.lattice, dp, dm, omega)


def lattice_from_sizes(sizes: Sequence[int] | int) -> LatticeSpec:
    return LatticeSpec(tuple(np.atleast_1d(sizes)))
