"""Quantum carpets, energy-moment scaling and trajectory diagnostics for
truncated spectral states (infinite well, Kerr oscillator, free slit)."""

from .spectral import (
    BasisSpec,
    CoefficientLaw,
    ScalingTriple,
    SpaceTimeGrid,
    SpectralState,
    build_state,
    evaluate_wavefunction,
    evaluate_wavefunction_fast,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "CoefficientLaw",
    "ScalingTriple",
    "SpaceTimeGrid",
    "SpectralState",
    "build_state",
    "evaluate_wavefunction",
    "evaluate_wavefunction_fast",
    "__version__",
]
