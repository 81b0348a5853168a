import math

import numpy as np
import pytest
from scipy import integrate

from evenodd import ConfigError, CouplingModel, DomainError, critical_lambda
from evenodd.asymptotics import (
    agm,
    critical_divergence_law,
    elliptic_k,
    geometric_alpha,
    isotropic_f,
    lattice_alpha,
    weak_coupling_predictions_1d,
    weak_coupling_predictions_dd,
    xy_block_entropy_infinite,
)
from evenodd.gaussian import mode_contractions, subsystem_entropy
from evenodd.selectors import Block, EvenComb, SingleSite

ALPHA1 = 1 - math.log(2)


def test_zero_pairing_predicts_nothing():
    p = weak_coupling_predictions_1d(1.0, 0.0, 5.0, 36)
    assert (p.f, p.single_site, p.even, p.block, p.mutual) == (0, 0, 0, 0, 0)


def test_one_dimensional_relations():
    n, lam = 36, 40.0
    p = weak_coupling_predictions_1d(1.0, 1.0 / 3.0, lam, n)
    f = (1 / 3) ** 2 / (8 * lam**2)
    assert p.f == pytest.approx(f)
    assert p.even == pytest.approx(n / 2 * p.single_site - n / 2 * f * ALPHA1)
    assert p.even == pytest.approx(n / 2 * p.block - n / 2 * f)
    assert p.block - p.single_site == pytest.approx(f * math.log(2))


def test_large_pairing_is_out_of_domain():
    with pytest.raises(DomainError):
        weak_coupling_predictions_1d(0.0, 10.0, 1.0, 8)


def test_one_dimensional_predictions_match_pipeline():
    dp, dm, n = 0.9, 0.3, 36
    base = CouplingModel.first_neighbor((n,), None, dp, dm)
    lam = 20 * critical_lambda(base).lambda_c
    assert lam == pytest.approx(24.0)
    cons = mode_contractions(base.with_lambda(lam))
    p = weak_coupling_predictions_1d(dp, dm, lam, n)
    for value, sel in ((p.single_site, SingleSite()), (p.even, EvenComb()), (p.block, Block(n // 2))):
        assert value == pytest.approx(subsystem_entropy(cons, sel).entropy, rel=0.1)


def test_dd_reduces_to_1d():
    a = weak_coupling_predictions_1d(1.0, 0.4, 30.0, 20)
    b = weak_coupling_predictions_dd(1.0, 0.4, 30.0, (20,))
    for name in ("f", "single_site", "even", "block", "mutual", "alpha"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)


def test_two_dimensional_block_form():
    lam, nx = 50.0, 6
    p = weak_coupling_predictions_dd(1.0, 1.0 / 3.0, lam, (nx, nx))
    f = 2 * (1 / 3) ** 2 / (8 * lam**2)
    assert p.block == pytest.approx(-(nx / 2) * f * (math.log(f / 4) - 1))


def test_block_to_single_site_ratio_grows_like_side():
    ratios = []
    for lam in (1e2, 1e4, 1e8):
        p = weak_coupling_predictions_dd(1.0, 1.0 / 3.0, lam, (6, 6))
        ratios.append(p.block / p.single_site)
    assert abs(ratios[-1] - 3.0) < abs(ratios[0] - 3.0)
    assert ratios[-1] == pytest.approx(3.0, rel=0.1)


def test_isotropic_fixed_ratio_form():
    for d, sizes in ((1, (36,)), (2, (6, 6))):
        base = CouplingModel.first_neighbor(sizes, None, 1.0, 1.0 / 3.0)
        lam = 7.0 * critical_lambda(base).lambda_c
        f = weak_coupling_predictions_dd(1.0, 1.0 / 3.0, lam, sizes).f
        assert isotropic_f(1.0 / 3.0, 7.0, d) == pytest.approx(f)
    assert isotropic_f(1 / 3, 5.0, 2) == pytest.approx(0.5 * isotropic_f(1 / 3, 5.0, 1))


@pytest.mark.parametrize("d, expected", [(1, ALPHA1), (2, 2 * ALPHA1)])
def test_geometric_alpha_known_values(d, expected):
    assert geometric_alpha(d=d) == pytest.approx(expected, abs=1e-6)


def test_geometric_alpha_three_dimensions():
    assert geometric_alpha(d=3, resolution=256) == pytest.approx(0.636, abs=0.01)


@pytest.mark.parametrize("d", [1, 2])
def test_geometric_alpha_resolution_converged(d):
    assert abs(geometric_alpha(d=d, resolution=2048) - geometric_alpha(d=d)) < 1e-8


def test_geometric_alpha_anisotropic_and_errors():
    a = geometric_alpha([1.0, 0.0])
    assert a == pytest.approx(ALPHA1, abs=1e-6)
    assert geometric_alpha([1.0, 0.5]) > 0
    with pytest.raises(ConfigError):
        geometric_alpha([0.0, 0.0])
    with pytest.raises(ConfigError):
        geometric_alpha()


def test_lattice_alpha_tends_to_continuum():
    assert lattice_alpha([1.0], [4096]) == pytest.approx(ALPHA1, abs=1e-6)
    assert lattice_alpha([1.0, 1.0], [256, 256]) == pytest.approx(2 * ALPHA1, abs=1e-4)
    assert lattice_alpha([1.0], [36]) != pytest.approx(ALPHA1, abs=1e-4)


@pytest.mark.parametrize("sizes", [(36,), (6, 6)])
def test_deviation_shrinks_with_coupling_strength(sizes):
    base = CouplingModel.first_neighbor(sizes, None, 1.0, 1.0 / 3.0)
    lam_c = critical_lambda(base).lambda_c
    devs = []
    for ratio in (10.0, 100.0, 1000.0):
        cons = mode_contractions(base.with_lambda(ratio * lam_c))
        p = weak_coupling_predictions_dd(1.0, 1.0 / 3.0, ratio * lam_c, sizes, alpha_mode="lattice")
        exact = subsystem_entropy(cons, EvenComb()).entropy
        devs.append(abs(p.even - exact) / exact)
    assert devs[0] < 0.1
    assert devs[0] / devs[1] > 5 and devs[1] / devs[2] > 5


def test_divergence_law_fit():
    x = np.logspace(-6, -4, 7)
    slope, intercept = critical_divergence_law(1 + x, -0.25 * np.log(x) + 0.7)
    assert slope == pytest.approx(-0.25) and intercept == pytest.approx(0.7)
    slope, _ = critical_divergence_law(1 + x, np.full(7, 2.0))
    assert slope == pytest.approx(0.0, abs=1e-12)


def test_divergence_law_needs_three_points():
    with pytest.raises(ConfigError):
        critical_divergence_law([1.1, 1.2], [0.1, 0.2])


def test_divergence_of_even_entropy():
    base = CouplingModel.first_neighbor((36,), None, 1.0, 1.0 / 3.0)
    lam_c = critical_lambda(base).lambda_c
    x = np.logspace(-6, -4, 5)
    s = [subsystem_entropy(mode_contractions(base.with_lambda((1 + e) * lam_c)), EvenComb()).entropy for e in x]
    slope, _ = critical_divergence_law(1 + x, s)
    assert slope == pytest.approx(-0.25, abs=0.02)


def test_agm_and_elliptic():
    assert agm(1.0, 1.0) == 1.0
    assert agm(1.0, 2.0) == pytest.approx(1.4567910310469068)
    assert elliptic_k(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    with pytest.raises(DomainError):
        elliptic_k(1.0)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
def test_elliptic_matches_quadrature(k):
    val, _ = integrate.quad(
        lambda t: 1 / math.sqrt(1 - (k * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-14, epsrel=1e-13
    )
    assert abs(elliptic_k(k) - val) < 1e-9


def test_infinite_chain_block_entropy():
    dp, dm = 1.0, 1.0 / 3.0
    lam = 100 * (dp + dm)
    f = dm**2 / (8 * lam**2)
    assert xy_block_entropy_infinite(lam, dp, dm) == pytest.approx(-f * (math.log(f / 2) - 1), rel=0.01)
    assert 0 <= xy_block_entropy_infinite(2.0, 1.0, 1e-4) < 1e-6
    assert xy_block_entropy_infinite(2.0, 1.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        xy_block_entropy_infinite(0.5, 1.0, 0.2)
