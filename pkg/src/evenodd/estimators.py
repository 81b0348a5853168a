"""Transformer-style wrappers: a column of couplings or fields in, entropies out.

Each estimator is configured with a model family.  ``fit`` validates the
hyperparameters and caches the derived critical scale; ``transform`` maps
each sweep value to one entropy per selector.

>>> est = GaussianEntanglement(sizes=(8,), selectors=("single_site", "even_comb"))
>>> est.fit().transform([2.0, 4.0]).shape
(2, 2)
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exact_spin import DEFAULT_CAP, exact_ground_state, reduced_entropy_exact
from .exceptions import CriticalPointError, InstabilityError
from .gaussian import log_divisor, mode_contractions, subsystem_entropy
from .lattice import CouplingModel, LatticeSpec, critical_lambda
from .spin import SpinModel
from .spin_rpa import rpa_entropy
from .validation import (
    check_base,
    check_choice,
    check_selectors,
    check_sizes,
    check_sweep_values,
)


class _SweepTransformer(TransformerMixin, BaseEstimator):
    _prefix = ""

    def _fit_model(self):
        raise NotImplementedError

    def _entropies(self, value) -> np.ndarray:
        raise NotImplementedError

    def fit(self, X=None, y=None):
        """Validate hyperparameters; ``X`` and ``y`` are ignored."""
        self.base_ = check_base(self.base)
        self.lattice_ = LatticeSpec(check_sizes(self.sizes))
        self.selectors_ = check_selectors(self.selectors)
        for sel in self.selectors_:
            sel.indices(self.lattice_)
        self._fit_model()
        self.n_features_in_ = 1
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "selectors_")
        values = check_sweep_values(X)
        out = np.empty((values.size, len(self.selectors_)))
        for i, v in enumerate(values):
            out[i] = self._entropies(float(v))
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "selectors_")
        return np.asarray([f"{self._prefix}:{s.label}" for s in self.selectors_], dtype=object)


class GaussianEntanglement(_SweepTransformer):
    """Exact Gaussian entropies of a first-neighbour boson array.

    ``scale`` fixes how input values are read: ``"absolute"`` (lambda),
    ``"ratio"`` (lambda / lambda_c) or ``"excess"`` (lambda / lambda_c - 1).
    Unstable inputs give NaN unless ``on_unstable="raise"``.
    """

    _prefix = "gaussian"

    def __init__(
        self, sizes=(36,), delta_plus=1.0, delta_minus=1.0 / 3.0,
        selectors=("single_site", "even_comb"), scale="ratio", base="e", on_unstable="nan",
    ):
        self.sizes = sizes
        self.delta_plus = delta_plus
        self.delta_minus = delta_minus
        self.selectors = selectors
        self.scale = scale
        self.base = base
        self.on_unstable = on_unstable

    def _fit_model(self):
        check_choice("scale", self.scale, ("absolute", "ratio", "excess"))
        check_choice("on_unstable", self.on_unstable, ("nan", "raise"))
        self.model_ = CouplingModel.first_neighbor(
            self.lattice_, None, self.delta_plus, self.delta_minus
        )
        self.lambda_c_ = critical_lambda(self.model_).lambda_c

    def lambda_of(self, value: float) -> float:
        if self.scale == "absolute":
            return value
        return (value if self.scale == "ratio" else 1.0 + value) * self.lambda_c_

    def _entropies(self, value):
        try:
            cons = mode_contractions(self.model_.with_lambda(self.lambda_of(value)))
        except InstabilityError:
            if self.on_unstable == "raise":
                raise
            return np.full(len(self.selectors_), np.nan)
        return np.array([subsystem_entropy(cons, s, self.base_).entropy for s in self.selectors_])


class _SpinTransformer(_SweepTransformer):
    def _fit_model(self):
        check_choice("scale", self.scale, ("absolute", "ratio"))
        self.model_ = SpinModel.first_neighbor(self.lattice_, self.spin, 0.0, self.j_x, self.j_y)
        self.b_c_ = self.model_.b_c
        self.b_s_ = self.model_.b_s

    def field_of(self, value: float) -> float:
        return value if self.scale == "absolute" else value * self.b_c_


class RpaEntanglement(_SpinTransformer):
    """RPA entropies of a first-neighbour XY spin array.

    With ``shifted=True`` the parity-restoration shift is included where it
    applies.  Inputs inside the critical window give NaN unless
    ``on_critical="raise"``.
    """

    _prefix = "rpa"

    def __init__(
        self, sizes=(8,), spin=0.5, j_x=1.0, j_y=0.5, selectors=("even_comb",),
        scale="ratio", base="e", shifted=True, on_critical="nan",
    ):
        self.sizes = sizes
        self.spin = spin
        self.j_x = j_x
        self.j_y = j_y
        self.selectors = selectors
        self.scale = scale
        self.base = base
        self.shifted = shifted
        self.on_critical = on_critical

    def _fit_model(self):
        super()._fit_model()
        check_choice("on_critical", self.on_critical, ("nan", "raise"))

    def _entropies(self, value):
        spin = self.model_.with_field(self.field_of(value))
        out = []
        for sel in self.selectors_:
            try:
                res = rpa_entropy(spin, sel, self.base_)
            except CriticalPointError:
                if self.on_critical == "raise":
                    raise
                out.append(math.nan)
                continue
            out.append(res.shifted if self.shifted else res.raw)
        return np.array(out)


class ExactSpinEntanglement(_SpinTransformer):
    """Exact ground-state entropies of a small XY spin array.

    The ground state is taken in the lower-energy S_z parity sector.  With
    ``shifted=True`` one ``ln 2`` (in the chosen base) is subtracted for
    fields below the factorizing field.
    """

    _prefix = "ed"

    def __init__(
        self, sizes=(8,), spin=0.5, j_x=1.0, j_y=0.5, selectors=("even_comb",),
        scale="ratio", base="e", shifted=False, cap=DEFAULT_CAP,
    ):
        self.sizes = sizes
        self.spin = spin
        self.j_x = j_x
        self.j_y = j_y
        self.selectors = selectors
        self.scale = scale
        self.base = base
        self.shifted = shifted
        self.cap = cap

    def _entropies(self, value):
        spin = self.model_.with_field(self.field_of(value))
        state = exact_ground_state(spin, int(self.cap)).vector
        d = int(round(2 * spin.spin)) + 1
        out = np.array(
            [reduced_entropy_exact(state, s, self.lattice_, d, self.base_) for s in self.selectors_]
        )
        if self.shifted and self.b_s_ is not None and abs(spin.field) < self.b_s_:
            out -= math.log(2.0) / log_divisor(self.base_)
        return out


__all__ = ["GaussianEntanglement", "RpaEntanglement", "ExactSpinEntanglement"]
