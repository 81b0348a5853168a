import numpy as np
import pytest

from evenodd import ConfigError, CouplingModel, dispersion
from evenodd.fock_oracle import fock_hamiltonian, truncated_ground_state_entropy
from evenodd.gaussian import mode_contractions, subsystem_entropy
from evenodd.selectors import Explicit, SingleSite


def test_no_pairing_gives_the_vacuum():
    model = CouplingModel.first_neighbor((3,), 2.0, 0.5, 0.0)
    res = truncated_ground_state_entropy(model, SingleSite(), cutoff=10)
    assert res.entropy == pytest.approx(0.0, abs=1e-12)
    assert res.converged


@pytest.mark.parametrize(
    "sizes,lam,dp,dm,sel",
    [
        ((2,), 2.0, 0.4, 0.6, SingleSite()),
        ((3,), 3.0, 0.5, 0.5, SingleSite()),
        ((3,), 3.0, 0.5, 0.5, Explicit((0, 1))),
        ((3,), 2.5, -0.3, 0.8, SingleSite()),
    ],
)
def test_matches_gaussian_entropy(sizes, lam, dp, dm, sel):
    model = CouplingModel.first_neighbor(sizes, lam, dp, dm)
    fock = truncated_ground_state_entropy(model, sel, cutoff=30, tol=1e-8)
    gauss = subsystem_entropy(mode_contractions(model), sel).entropy
    assert fock.converged
    assert fock.entropy == pytest.approx(gauss, abs=1e-8)


def test_ground_energy_is_half_mode_sum():
    model = CouplingModel.first_neighbor((3,), 3.0, 0.5, 0.5)
    res = truncated_ground_state_entropy(model, SingleSite(), cutoff=24)
    assert res.energy == pytest.approx(0.5 * dispersion(model).omega.sum(), abs=1e-9)


def test_cutoff_convergence_is_monotone():
    model = CouplingModel.first_neighbor((2,), 1.5, 0.3, 0.9)
    exact = subsystem_entropy(mode_contractions(model), SingleSite()).entropy
    errors = [
        abs(truncated_ground_state_entropy(model, SingleSite(), cutoff=c).entropy - exact)
        for c in (8, 12, 16, 24)
    ]
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_hamiltonian_is_symmetric():
    ham = fock_hamiltonian(CouplingModel.first_neighbor((2,), 2.0, 0.4, 0.6), 6)
    assert abs(ham - ham.T).max() < 1e-14


def test_limits():
    with pytest.raises(ConfigError, match="modes"):
        truncated_ground_state_entropy(CouplingModel.first_neighbor((4,), 3.0, 0.5, 0.5), SingleSite())
    model = CouplingModel.first_neighbor((2,), 2.0, 0.4, 0.6)
    for cutoff in (4, 41):
        with pytest.raises(ConfigError, match="cutoff"):
            truncated_ground_state_entropy(model, SingleSite(), cutoff=cutoff)
    with pytest.raises(ConfigError, match="stable"):
        truncated_ground_state_entropy(CouplingModel.first_neighbor((2,), 0.5, 0.4, 0.6), SingleSite())
