"""Normal forms of Hamiltonian field theories near the wave equation.

The package computes resonant normal forms of graded polynomial
perturbations of ``q_tt = q_xx`` on the circle with exact coefficient
arithmetic, tests the computed normal forms against the KdV hierarchy,
and checks the predictions numerically with spectral PDE integration and
symplectic lattice simulation.
"""

from wavenf.errors import AlgebraError, BlowUpError, MixedNonlocalError, ParseError, WavenfError
from wavenf.normalform import (
    GradedHamiltonian,
    NormalFormResult,
    average0,
    background_k0,
    generalized_fpu_Z1,
    normal_form_mechanical,
    normal_form_order2,
    solve_homological,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "BlowUpError",
    "GradedHamiltonian",
    "MixedNonlocalError",
    "NormalFormResult",
    "ParseError",
    "WavenfError",
    "average0",
    "background_k0",
    "generalized_fpu_Z1",
    "normal_form_mechanical",
    "normal_form_order2",
    "solve_homological",
    "__version__",
]
