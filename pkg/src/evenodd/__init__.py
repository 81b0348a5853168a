"""Ground-state entanglement of quadratic boson lattices and XY spin arrays."""
from .exceptions import (
    ConfigError,
    ConvergenceError,
    CriticalPointError,
    DomainError,
    EvenOddError,
    InstabilityError,
    NumericalDegeneracyError,
    SymmetryError,
    UnsupportedModelError,
)
from .lattice import CouplingModel, LatticeSpec, critical_lambda, dispersion, fourier_couplings
from .selectors import Block, EvenComb, Explicit, OddComb, SingleSite, parse_selector
from .gaussian import (
    EntropyResult,
    entropy,
    entropy_h,
    even_mutual_entropy,
    even_odd_entropy_folded,
    mode_contractions,
    subsystem_entropy,
    symplectic_spectrum,
)
from .spin import SpinModel
from .spin_rpa import rpa_boson_map, rpa_entropy

__version__ = "0.1.0"

__all__ = [
    "Block",
    "ConfigError",
    "ConvergenceError",
    "CouplingModel",
    "CriticalPointError",
    "DomainError",
    "EntropyResult",
    "EvenComb",
    "EvenOddError",
    "Explicit",
    "InstabilityError",
    "LatticeSpec",
    "NumericalDegeneracyError",
    "OddComb",
    "SingleSite",
    "SpinModel",
    "SymmetryError",
    "UnsupportedModelError",
    "critical_lambda",
    "dispersion",
    "entropy",
    "entropy_h",
    "even_mutual_entropy",
    "even_odd_entropy_folded",
    "fourier_couplings",
    "mode_contractions",
    "parse_selector",
    "rpa_boson_map",
    "rpa_entropy",
    "subsystem_entropy",
    "symplectic_spectrum",
]
