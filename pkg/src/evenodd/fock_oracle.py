"""Brute-force check of the Gaussian formalism in a truncated occupation basis.

The real-space Hamiltonian

    H = sum_ij (lam d_ij - D+_ij)(b_i^dag b_j + d_ij / 2)
        - 1/2 sum_ij (D-_ij b_i^dag b_j^dag + D-_ij b_j b_i)

is written out for at most three modes with occupations 0..N_max per mode,
its lowest eigenvector is found directly, and the reduced entropy is obtained
by partial trace.  Nothing here goes through k-space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .exceptions import ConfigError, ConvergenceError
from .exact_spin import schmidt_probabilities
from .gaussian import log_divisor
from .lattice import CouplingModel, critical_lambda
from .selectors import as_selector

MAX_MODES = 3
MAX_CUTOFF = 40
MIN_CUTOFF = 8
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class FockResult:
    entropy: float
    entropy_half_cutoff: float
    energy: float
    cutoff: int
    converged: bool
    tol: float

    @property
    def drift(self) -> float:
        return abs(self.entropy - self.entropy_half_cutoff)


def _ladder(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), -1, format="csr")


def fock_hamiltonian(model: CouplingModel, cutoff: int) -> sp.csr_matrix:
    n = model.lattice.n
    d = cutoff + 1
    create = _ladder(cutoff)
    eye = sp.identity(d, format="csr")

    def at(op, site):
        out = sp.identity(1, format="csr")
        for s in range(n):
            out = sp.kron(out, op if s == site else eye, format="csr")
        return out

    up = [at(create, i) for i in range(n)]
    down = [u.T.tocsr() for u in up]
    dp = model.real_space_matrix("plus")
    dm = model.real_space_matrix("minus")
    ham = sp.csr_matrix((d**n, d**n))
    for i in range(n):
        for j in range(n):
            hop = (model.lam if i == j else 0.0) - dp[i, j]
            if hop:
                ham = ham + hop * (up[i] @ down[j])
            if dm[i, j]:
                ham = ham - 0.5 * dm[i, j] * (up[i] @ up[j] + down[j] @ down[i])
    # zero-point term from the symmetrized ordering
    ham = ham + 0.5 * n * model.lam * sp.identity(d**n, format="csr")
    return ham.tocsr()


def _ground(ham):
    if ham.shape[0] <= DENSE_LIMIT:
        vals, vecs = eigh(ham.toarray(), subset_by_index=[0, 0])
        return float(vals[0]), vecs[:, 0]
    v0 = np.ones(ham.shape[0])
    vals, vecs = eigsh(ham, k=1, which="SA", v0=v0, tol=1e-13, maxiter=50000)
    return float(vals[0]), vecs[:, 0]


def _entropy_at(model, cutoff, sites, base):
    energy, vec = _ground(fock_hamiltonian(model, cutoff))
    p = schmidt_probabilities(vec, sites, model.lattice.n, cutoff + 1)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) / log_divisor(base), energy


def truncated_ground_state_entropy(
    model: CouplingModel, selector, cutoff: int = 30, base="e", tol: float = 1e-6,
    strict: bool = False,
) -> FockResult:
    """Reduced entropy of the truncated-Fock ground state, with a cutoff-halving check.

    ``converged`` is False when the entropies at ``cutoff`` and ``cutoff // 2``
    differ by more than ``tol``; with ``strict=True`` that raises instead.
    """
    lattice = model.lattice
    if lattice.n > MAX_MODES:
        raise ConfigError(f"Fock oracle handles at most {MAX_MODES} modes, got {lattice.n}")
    if not MIN_CUTOFF <= cutoff <= MAX_CUTOFF:
        raise ConfigError(f"cutoff must lie in [{MIN_CUTOFF}, {MAX_CUTOFF}], got {cutoff}")
    if not critical_lambda(model).stable:
        raise ConfigError("Fock oracle needs a stable model")
    sites = as_selector(selector).indices(lattice)
    s_full, energy = _entropy_at(model, cutoff, sites, base)
    s_half, _ = _entropy_at(model, cutoff // 2, sites, base)
    converged = abs(s_full - s_half) <= tol
    if strict and not converged:
        raise ConvergenceError(
            f"Fock entropy moved by {abs(s_full - s_half):.2e} between cutoffs "
            f"{cutoff // 2} and {cutoff}"
        )
    return FockResult(s_full, s_half, energy, cutoff, converged, tol)
