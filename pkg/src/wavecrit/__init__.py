"""Decay exponents, critical curves and blow-up checks for semilinear wave systems."""
from .catalog import (
    CRITICAL, STABLE, UNSTABLE, QuadSurd, dv_exponent, glassey_exponent, strauss_exponent,
)
from .decay import DataSpec, NonlinearTerm, WaveSystem, classify
from .fitting import DecayFit, fit_decay
from .simulator import Grid, detect_blowup, evolve, weak_null_chain

__all__ = [
    "CRITICAL", "STABLE", "UNSTABLE", "QuadSurd", "dv_exponent", "glassey_exponent",
    "strauss_exponent", "DataSpec", "NonlinearTerm", "WaveSystem", "classify", "DecayFit",
    "fit_decay", "Grid", "detect_blowup", "evolve", "weak_null_chain",
]
__version__ = "0.1.0"
