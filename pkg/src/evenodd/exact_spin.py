"""Exact diagonalization of finite XY spin-s arrays with definite S_z parity.

The Hamiltonian is built in the plain product basis (site 0 is the most
significant factor, local index ``a = m + s``).  The S_z parity
``P_z = exp(i pi (sum_i s_iz + n s))`` is diagonal there, equal to
``(-1)^(sum_i a_i)``, so each parity sector is just a subset of basis states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, expm
from scipy.sparse.linalg import eigsh

from .exceptions import ConfigError, ConvergenceError
from .gaussian import log_divisor
from .selectors import as_selector
from .spin import SpinModel, spin_matrices

DEFAULT_CAP = 2**20
DENSE_LIMIT = 4096
CROSSING_TOL = 1e-10


@dataclass(frozen=True)
class SpinBasis:
    n: int
    spin: float
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.dim > self.cap:
            raise ConfigError(
                f"Hilbert space dimension {self.dim} exceeds the cap {self.cap}; "
                f"raise the cap to at least {self.dim}"
            )

    @property
    def local_dim(self) -> int:
        return int(round(2 * self.spin)) + 1

    @property
    def dim(self) -> int:
        return self.local_dim**self.n

    def parity(self) -> np.ndarray:
        """Diagonal of ``P_z`` as a +-1 integer array."""
        digits = np.indices((self.local_dim,) * self.n).reshape(self.n, -1)
        return np.where(digits.sum(axis=0) % 2 == 0, 1, -1)


def _site_op(op: sp.spmatrix, site: int, n: int, d: int) -> sp.csr_matrix:
    left = sp.identity(d**site, format="csr")
    right = sp.identity(d ** (n - site - 1), format="csr")
    return sp.kron(sp.kron(left, op, format="csr"), right, format="csr")


def build_spin_hamiltonian(model: SpinModel, cap: int = DEFAULT_CAP):
    """Sparse real symmetric Hamiltonian and its basis.

    Uses ``J_x s_x s_x + J_y s_y s_y = D+ (s_+ s_- + s_- s_+) / 2 + D- (s_+ s_+ + s_- s_-) / 2``
    with ``D+- = (J_x +- J_y) / 2``, summed over ordered pairs ``i != j``.
    """
    lattice = model.lattice
    basis = SpinBasis(lattice.n, model.spin, cap)
    n, d, s = basis.n, basis.local_dim, model.spin
    sz, splus, sminus = (sp.csr_matrix(m) for m in spin_matrices(s))
    z_ops = [_site_op(sz, i, n, d) for i in range(n)]
    p_ops = [_site_op(splus, i, n, d) for i in range(n)]
    m_ops = [_site_op(sminus, i, n, d) for i in range(n)]

    ham = model.field * sum(z_ops[1:], z_ops[0])
    dplus, dminus = model.delta_plus, model.delta_minus
    sites = np.arange(n)
    disp = lattice.displacement_index(sites, sites)
    table_p = np.zeros(lattice.n)
    table_m = np.zeros(lattice.n)
    for key, value in dplus.items():
        table_p[lattice.flat_index(key)[0]] = value
    for key, value in dminus.items():
        table_m[lattice.flat_index(key)[0]] = value
    coupling = sp.csr_matrix((basis.dim, basis.dim))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gp, gm = table_p[disp[i, j]], table_m[disp[i, j]]
            if gp:
                coupling = coupling + 0.5 * gp * (p_ops[i] @ m_ops[j] + m_ops[i] @ p_ops[j])
            if gm:
                coupling = coupling + 0.5 * gm * (p_ops[i] @ p_ops[j] + m_ops[i] @ m_ops[j])
    ham = ham - coupling / (2.0 * s)
    return ham.tocsr(), basis


@dataclass(frozen=True)
class SectorState:
    parity: int
    energy: float
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class GroundStateResult:
    sectors: dict
    ground_parity: int
    gap: float
    crossing: bool

    @property
    def ground(self) -> SectorState:
        return self.sectors[self.ground_parity]

    @property
    def energy(self) -> float:
        return self.ground.energy

    @property
    def vector(self) -> np.ndarray:
        return self.ground.vector


def _lowest(block, dense: bool, rng_seed: int = 7):
    if dense:
        mat = block.toarray() if sp.issparse(block) else np.asarray(block)
        vals, vecs = eigh(mat, subset_by_index=[0, 0])
        return float(vals[0]), vecs[:, 0]
    v0 = np.random.default_rng(rng_seed).standard_normal(block.shape[0])
    try:
        vals, vecs = eigsh(block, k=1, which="SA", v0=v0, tol=1e-12, maxiter=20000)
    except Exception as exc:  # ArpackNoConvergence carries no residual we can trust
        raise ConvergenceError(f"Lanczos iteration did not converge: {exc}") from exc
    return float(vals[0]), vecs[:, 0]


def ground_state_definite_parity(ham, basis: SpinBasis, dense_limit: int = DENSE_LIMIT):
    """Lowest state in each S_z parity sector and the global ground state."""
    parity = basis.parity()
    ham = sp.csr_matrix(ham)
    scale = max(1.0, float(abs(ham).sum(axis=1).max()))
    sectors = {}
    for p in (1, -1):
        idx = np.flatnonzero(parity == p)
        block = ham[idx][:, idx]
        energy, sub = _lowest(block, basis.dim <= dense_limit)
        vec = np.zeros(basis.dim)
        vec[idx] = sub / np.linalg.norm(sub)
        residual = float(np.linalg.norm(ham @ vec - energy * vec))
        if residual > 1e-9 * scale:
            raise ConvergenceError(f"sector {p:+d} residual {residual:.2e} too large")
        sectors[p] = SectorState(p, energy, vec, residual)
    gap = sectors[-1].energy - sectors[1].energy
    ground = 1 if gap >= 0 else -1
    return GroundStateResult(
        sectors=sectors, ground_parity=ground, gap=abs(gap), crossing=abs(gap) < CROSSING_TOL * scale
    )


def schmidt_probabilities(state, keep, n: int, local_dim: int) -> np.ndarray:
    """Eigenvalues of the reduced density matrix of sites ``keep``."""
    keep = [int(i) for i in keep]
    rest = [i for i in range(n) if i not in keep]
    psi = np.asarray(state).reshape((local_dim,) * n)
    psi = np.transpose(psi, keep + rest).reshape(local_dim ** len(keep), -1)
    sv = np.linalg.svd(psi, compute_uv=False)
    p = sv**2
    if np.any(p < -1e-12):
        raise ConvergenceError("negative reduced-density eigenvalue")
    return np.clip(p, 0.0, None)


def reduced_entropy_exact(state, selector, lattice, local_dim: int, base="e") -> float:
    """Von Neumann entropy of the reduced state of the selected sites."""
    idx = as_selector(selector).indices(lattice)
    p = schmidt_probabilities(state, idx, lattice.n, local_dim)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) / log_divisor(base)


def mean_field_state(model: SpinModel, theta: float) -> np.ndarray:
    """Product state ``prod_i exp(-i theta s_iy) |m = -s>``."""
    _, splus, sminus = spin_matrices(model.spin)
    # -i theta s_y is the real generator -theta (s_+ - s_-) / 2
    local = expm(-0.5 * theta * (splus - sminus))[:, 0]
    out = np.ones(1)
    for _ in range(model.lattice.n):
        out = np.kron(out, local)
    return out


def parity_projected_mean_field(model: SpinModel, theta: float, parity: int) -> np.ndarray:
    plus = mean_field_state(model, theta)
    minus = mean_field_state(model, -theta)
    vec = plus + parity * minus
    return vec / np.linalg.norm(vec)


def exact_ground_state(model: SpinModel, cap: int = DEFAULT_CAP) -> GroundStateResult:
    ham, basis = build_spin_hamiltonian(model, cap)
    return ground_state_definite_parity(ham, basis)


__all__ = [
    "SpinBasis",
    "GroundStateResult",
    "SectorState",
    "build_spin_hamiltonian",
    "ground_state_definite_parity",
    "reduced_entropy_exact",
    "schmidt_probabilities",
    "mean_field_state",
    "parity_projected_mean_field",
    "exact_ground_state",
]
