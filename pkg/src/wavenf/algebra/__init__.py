"""Exact symbolic algebra for densities and functionals on the circle.

Submodules
----------
coefficients
    Rational-function coefficient field with square-root symbols.
densities
    Local factors, antiderivative factors, monomials, density polynomials.
observables
    Integrated functionals canonicalized modulo total derivatives.
variational
    Variational derivatives, Poisson structures and brackets.
numeric
    Spectral evaluation oracles for densities and observables.
"""

from wavenf.algebra.coefficients import CoefficientExpr, ONE, ZERO, coeff, parse_coefficient
from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    Factor,
    LocalFactor,
    Monomial,
    VARIABLES,
    density,
    grade_decomposition,
    local,
    substitute_linear,
)
from wavenf.algebra.numeric import (
    PeriodicField,
    averaged_evaluate,
    evaluate,
    evaluate_density,
    evaluate_observable,
    gateaux_derivative,
    translated_fields,
)
from wavenf.algebra.observables import ObservableExpr, integrate, lie_translation, normalize, observable
from wavenf.algebra.variational import (
    Gradient,
    PoissonStructure,
    poisson_bracket,
    variational_derivative,
    vector_field,
)

__all__ = [
    "AntiDerivFactor",
    "CoefficientExpr",
    "DensityPolynomial",
    "Factor",
    "Gradient",
    "LocalFactor",
    "Monomial",
    "ObservableExpr",
    "ONE",
    "PeriodicField",
    "PoissonStructure",
    "VARIABLES",
    "ZERO",
    "averaged_evaluate",
    "coeff",
    "density",
    "evaluate",
    "evaluate_density",
    "evaluate_observable",
    "gateaux_derivative",
    "grade_decomposition",
    "integrate",
    "lie_translation",
    "local",
    "normalize",
    "observable",
    "parse_coefficient",
    "poisson_bracket",
    "substitute_linear",
    "translated_fields",
    "variational_derivative",
    "vector_field",
]
