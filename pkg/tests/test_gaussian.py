import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evenodd import CouplingModel, DomainError, critical_lambda, entropy_h
from evenodd.gaussian import (
    even_mutual_entropy,
    even_odd_entropy_folded,
    folded_even_spectrum,
    mode_contractions,
    subsystem_contraction_matrix,
    subsystem_entropy,
    symplectic_spectrum,
)
from evenodd.selectors import Block, EvenComb, Explicit, FullLattice, OddComb, SingleSite


def chain(n, ratio, dp=1.0, dm=1.0 / 3.0):
    base = CouplingModel.first_neighbor((n,), None, dp, dm)
    return base.with_lambda(ratio * critical_lambda(base).lambda_c)


def k_sum_contractions(model):
    """Direct k-sum of the per-mode contractions, independent of the FFT path."""
    lat = model.lattice
    n = lat.n
    k = lat.k_grid() / np.array(lat.sizes)
    dp = np.zeros(n)
    dm = np.zeros(n)
    for key, v in model.delta_plus:
        dp += v * np.cos(2 * np.pi * k @ np.array(key))
    for key, v in model.delta_minus:
        dm += v * np.cos(2 * np.pi * k @ np.array(key))
    w = np.sqrt((model.lam - dp) ** 2 - dm**2)
    fp = (model.lam - dp) / (2 * w) - 0.5
    fm = dm / (2 * w)
    sites = lat.sites()

    def table(f):
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = np.mean(f * np.cos(2 * np.pi * k @ (sites[i] - sites[j])))
        return out

    return table(fp), table(fm)


# ---------------------------------------------------------------- entropy_h


def test_entropy_h_values():
    assert entropy_h(0.0) == 0.0
    assert entropy_h(1.0) == pytest.approx(2 * math.log(2))
    assert entropy_h(1.0, 2) == pytest.approx(2.0)


@pytest.mark.parametrize("f", [1e-16, 1e-12, 1e-6, 1e-4])
def test_entropy_h_small_argument(f):
    assert entropy_h(f) == pytest.approx(-f * (math.log(f) - 1), rel=2 * f + 1e-12)


def test_entropy_h_clamps_and_rejects():
    assert entropy_h(-5e-11) == 0.0
    with pytest.raises(DomainError):
        entropy_h(-1e-6)


@settings(max_examples=60)
@given(st.floats(0, 50), st.floats(1e-6, 10))
def test_entropy_h_increasing(f, step):
    assert entropy_h(f + step) > entropy_h(f)


# ---------------------------------------------------------------- contractions


def test_no_pairing_gives_vacuum():
    model = CouplingModel.first_neighbor((6,), 2.0, 0.8, 0.0)
    cons = mode_contractions(model)
    assert np.all(cons.f_plus == 0) and np.all(cons.f_minus == 0)
    np.testing.assert_array_equal(cons.F_plus, 0.0)
    cm = subsystem_contraction_matrix(cons, Block(3))
    np.testing.assert_allclose(cm.matrix, np.diag([0, 0, 0, 1, 1, 1]), atol=1e-15)
    for sel in (SingleSite(), Block(2), EvenComb()):
        assert subsystem_entropy(cons, sel).entropy == 0.0
    assert even_odd_entropy_folded(cons).entropy == 0.0
    assert even_mutual_entropy(cons) == 0.0


def test_mode_invariants():
    cons = mode_contractions(chain(12, 1.3))
    assert np.all(cons.f_plus >= 0)
    np.testing.assert_allclose((0.5 + cons.f_plus) ** 2 - cons.f_minus**2, 0.25, atol=1e-10)
    np.testing.assert_allclose(cons.symplectic_per_k(), 0.0, atol=1e-12)
    reflect = (-np.arange(12)) % 12
    np.testing.assert_allclose(cons.F_plus, cons.F_plus[reflect], atol=1e-14)


def test_weak_coupling_contractions():
    model = CouplingModel.first_neighbor((8,), 200.0, 1.0, 0.5)
    cons = mode_contractions(model)
    approx_fm = cons.modes.delta_minus_k / (2 * model.lam)
    np.testing.assert_allclose(cons.f_minus, approx_fm, rtol=1e-2)
    np.testing.assert_allclose(cons.f_plus, cons.f_minus**2, rtol=2e-2, atol=1e-14)


def test_pairing_diverges_near_threshold():
    base = CouplingModel.first_neighbor((36,), None, 1.0, 1.0 / 3.0)
    lam_c = critical_lambda(base).lambda_c
    eps = 1e-8 * lam_c
    cons = mode_contractions(base.with_lambda(lam_c + eps))
    expected = math.sqrt(abs(cons.modes.delta_minus_k[0]) / (8 * eps))
    assert abs(cons.f_minus[0]) == pytest.approx(expected, rel=1e-3)


def test_block_matrix_matches_direct_k_sum():
    model = chain(6, 1.5)
    cons = mode_contractions(model)
    fp, fm = k_sum_contractions(model)
    cm = subsystem_contraction_matrix(cons, Block(2))
    np.testing.assert_allclose(cm.F_plus, fp[:2, :2], atol=1e-13)
    np.testing.assert_allclose(cm.F_minus, fm[:2, :2], atol=1e-13)
    mat = cm.matrix
    np.testing.assert_allclose(mat, mat.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(mat + cm.metric).min() > -1e-12


def test_single_site_matrix_and_eigenvalue():
    cons = mode_contractions(chain(8, 1.2))
    cm = subsystem_contraction_matrix(cons, SingleSite())
    assert cm.matrix.shape == (2, 2)
    fp, fm = cons.F_plus[0], cons.F_minus[0]
    expected = math.sqrt((fp + 0.5) ** 2 - fm**2) - 0.5
    assert symplectic_spectrum(cm)[0] == pytest.approx(expected, rel=1e-10)


# ---------------------------------------------------------------- spectra and symmetry


@pytest.mark.parametrize("sizes", [(8,), (12,), (4, 4), (6, 2)])
def test_full_lattice_is_pure(sizes):
    base = CouplingModel.first_neighbor(sizes, None, 0.7, -0.4)
    cons = mode_contractions(base.with_lambda(1.4 * critical_lambda(base).lambda_c))
    spec = symplectic_spectrum(subsystem_contraction_matrix(cons, FullLattice(), allow_full=True))
    assert spec.size == base.lattice.n
    assert np.max(np.abs(spec)) < 1e-9


def test_full_lattice_rejected_outside_test_mode():
    cons = mode_contractions(chain(4, 2.0))
    with pytest.raises(ValueError):
        subsystem_contraction_matrix(cons, FullLattice())


def test_spectrum_pairing_and_order():
    cons = mode_contractions(chain(10, 1.05))
    cm = subsystem_contraction_matrix(cons, Block(4))
    spec = symplectic_spectrum(cm)
    assert np.all(np.diff(spec) <= 0)
    ev = np.sort(np.linalg.eigvals(cm.matrix @ cm.metric).real)
    np.testing.assert_allclose(np.sort(np.concatenate([spec, -1 - spec])), ev, atol=1e-8)


random_couplings = st.lists(st.tuples(st.integers(1, 3), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5)), min_size=1, max_size=3)


def random_model(items, n, headroom):
    plus, minus = {}, {}
    for l, a, b in items:
        for key in (l, -l):
            plus[key] = plus.get(key, 0.0) + a
            minus[key] = minus.get(key, 0.0) + b
    model = CouplingModel((n,), None, plus, minus)
    lam_c = critical_lambda(model).lambda_c
    return model.with_lambda(max(lam_c, 0.1) * headroom)


@settings(max_examples=25, deadline=None)
@given(random_couplings, st.sampled_from([4, 8, 12]), st.floats(1.05, 4.0))
def test_complement_symmetry(items, n, headroom):
    cons = mode_contractions(random_model(items, n, headroom))
    lat = cons.lattice
    for sel in (SingleSite(), Block(n // 2), Block(1), EvenComb()):
        a = subsystem_entropy(cons, sel).entropy
        b = subsystem_entropy(cons, sel.complement(lat)).entropy
        assert a == pytest.approx(b, abs=1e-8)
    assert subsystem_entropy(cons, EvenComb()).entropy == pytest.approx(
        subsystem_entropy(cons, OddComb()).entropy, abs=1e-8
    )
    assert even_odd_entropy_folded(cons).entropy == pytest.approx(
        subsystem_entropy(cons, EvenComb()).entropy, abs=1e-8
    )


def test_explicit_subset_matches_complement():
    rng = np.random.default_rng(3)
    items = [(1, *rng.uniform(-0.5, 0.5, 2)), (2, *rng.uniform(-0.3, 0.3, 2))]
    cons = mode_contractions(random_model(items, 8, 1.7))
    a = subsystem_entropy(cons, Explicit((0, 3, 4))).entropy
    b = subsystem_entropy(cons, Explicit((1, 2, 5, 6, 7))).entropy
    assert a == pytest.approx(b, abs=1e-8)


@pytest.mark.parametrize("sizes", [(36,), (6, 6), (4, 8)])
def test_folded_matches_generic(sizes):
    base = CouplingModel.first_neighbor(sizes, None, 1.0, 1.0 / 3.0)
    cons = mode_contractions(base.with_lambda(1.01 * critical_lambda(base).lambda_c))
    assert even_odd_entropy_folded(cons).entropy == pytest.approx(
        subsystem_entropy(cons, EvenComb()).entropy, abs=1e-8
    )


def test_folded_requires_even_sizes():
    cons = mode_contractions(chain(5, 2.0))
    with pytest.raises(ValueError):
        even_odd_entropy_folded(cons)


def test_folded_weak_coupling_shape():
    n = 12
    model = chain(n, 200.0)
    cons = mode_contractions(model)
    f = (1.0 / 3.0) ** 2 / (8 * model.lam**2)
    k = np.arange(n)
    expected = 2 * f * np.cos(2 * np.pi * k / n) ** 2
    np.testing.assert_allclose(folded_even_spectrum(cons), expected, rtol=0.02, atol=1e-3 * f)


def test_folded_soft_mode_near_threshold():
    dp, dm = 1.0, 1.0 / 3.0
    base = CouplingModel.first_neighbor((36,), None, dp, dm)
    lam_c = critical_lambda(base).lambda_c
    eps = 1e-10 * lam_c * 100
    cons = mode_contractions(base.with_lambda(lam_c + eps))
    predicted = 0.5 * ((dm * lam_c / (8 * dp * eps)) ** 0.25 - 1)
    assert folded_even_spectrum(cons)[0] == pytest.approx(predicted, rel=0.05)


def test_even_entropy_grows_towards_threshold():
    ratios = [3.0, 2.0, 1.5, 1.2, 1.1, 1.01, 1.001, 1.0001]
    values = [even_odd_entropy_folded(mode_contractions(chain(36, r))).entropy for r in ratios]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_block_saturation_at_weak_coupling():
    n = 36
    model = chain(n, 20.0)
    cons = mode_contractions(model)
    f = (1.0 / 3.0) ** 2 / (8 * model.lam**2)
    values = []
    for length in range(2, n - 1):
        res = subsystem_entropy(cons, Block(length))
        values.append(res.entropy)
        big = res.spectrum[res.spectrum > 1e-3 * f]
        assert big.size == 2
        np.testing.assert_allclose(big, f / 2, rtol=0.2)
    values = np.array(values)
    assert (values.max() - values.min()) / values.mean() < 0.01


def test_even_mutual_entropy_from_parts():
    cons = mode_contractions(chain(12, 2.0))
    s_i = subsystem_entropy(cons, SingleSite()).entropy
    s_e = subsystem_entropy(cons, EvenComb()).entropy
    assert even_mutual_entropy(cons) == pytest.approx(6 * s_i - s_e, abs=1e-10)
    assert even_mutual_entropy(cons) > 0


def test_even_mutual_entropy_weak_coupling():
    n = 36
    model = chain(n, 300.0)
    f = (1.0 / 3.0) ** 2 / (8 * model.lam**2)
    value = even_mutual_entropy(mode_contractions(model))
    assert value == pytest.approx(n / 2 * f * (1 - math.log(2)), rel=0.02)


def test_base_two_divides_by_ln2():
    cons = mode_contractions(chain(8, 1.5))
    nat = subsystem_entropy(cons, EvenComb()).entropy
    bits = subsystem_entropy(cons, EvenComb(), base=2).entropy
    assert bits == pytest.approx(nat / math.log(2))
