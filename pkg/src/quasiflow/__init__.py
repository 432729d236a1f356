"""Pseudospectral hull-function simulator for time-evolving quasipatterns."""

from .brusselator import (
    BrusselatorParams,
    bruss_integrate,
    make_bruss_state,
    turing_analysis,
)
from .hull import ActiveModeSet, HullField
from .sh import integrate, make_state, quasicrystal_ic, random_ic
from .symmetry import build_holohedry, generate_frequency_module

__version__ = "0.1.0"

__all__ = [
    "ActiveModeSet",
    "BrusselatorParams",
    "HullField",
    "build_holohedry",
    "bruss_integrate",
    "generate_frequency_module",
    "integrate",
    "make_bruss_state",
    "make_state",
    "quasicrystal_ic",
    "random_ic",
    "turing_analysis",
    "__version__",
]
