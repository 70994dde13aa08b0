"""Order-two normal forms: averaging, homological solves, golden panels."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from wavenf.algebra.coefficients import CoefficientExpr
from wavenf.algebra.densities import density, local
from wavenf.algebra.numeric import PeriodicField, averaged_evaluate, evaluate_observable
from wavenf.algebra.observables import ObservableExpr, integrate, lie_translation
from wavenf.algebra.variational import PoissonStructure, poisson_bracket
from wavenf.errors import AlgebraError
from wavenf.models import FPUContinuumModel, GenericModel, generalized_fpu, to_uv
from wavenf.normalform import (
    GradedHamiltonian,
    average0,
    background_k0,
    generalized_fpu_Z1,
    normal_form_order2,
    solve_homological,
)
from wavenf.verify import (
    fpu_symbolic_result,
    generic_symbolic_result,
    mechanical_symbolic_result,
    water_wave_result,
)

sym = CoefficientExpr.symbol
rational = CoefficientExpr.from_rational
sqrt2 = CoefficientExpr.sqrt(2)

u, ux, uxx = local("u"), local("u", 1), local("u", 2)
v, vx, vxx = local("v"), local("v", 1), local("v", 2)


def test_background_is_the_half_sum_of_squares() -> None:
    k0 = background_k0()
    assert k0.coefficient_of([u, u]) == Fraction(1, 2)
    assert k0.coefficient_of([v, v]) == Fraction(1, 2)
    assert lie_translation(k0).is_zero


def test_average_keeps_invariants() -> None:
    inv = integrate(density((1, [u, u, u]), (Fraction(-1, 12), [vx, vx])))
    assert average0(inv) == inv


def test_average_factorizes_mixed_atoms() -> None:
    mixed = integrate(density((1, [u, u, v, v])))
    product = integrate(density((1, [u, u]))) * integrate(density((1, [v, v])))
    assert average0(mixed) == product
    assert average0(integrate(density((1, [u, u, u, v])))).is_zero


def test_average_of_two_oscillating_factors_raises() -> None:
    mixed = integrate(density((1, [u, v])))
    with pytest.raises(AlgebraError):
        average0(mixed * mixed)


def test_average_matches_translation_quadrature(rng: np.random.Generator) -> None:
    worst = 0.0
    for _ in range(5):
        picks = []
        for _ in range(2):
            factors = [
                local("uv"[int(rng.integers(0, 2))], int(rng.integers(0, 2)))
                for _ in range(int(rng.integers(2, 4)))
            ]
            picks.append((Fraction(int(rng.integers(-6, 7)) or 1, 2), factors))
        obs = integrate(density(*picks))
        fields = {
            "u": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
            "v": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
        }
        symbolic = evaluate_observable(average0(obs), fields)
        quadrature = averaged_evaluate(obs, fields, samples=128)
        worst = max(worst, abs(symbolic - quadrature) / max(1.0, abs(quadrature)))
    assert worst <= 1e-9


def test_solve_homological_properties() -> None:
    d1 = sym("d1")
    s = integrate(density((d1, [u, vx])))
    z, g = solve_homological(s)
    assert z.is_zero
    assert (lie_translation(g) - (s - z)).is_zero
    assert average0(g).is_zero


def test_solve_homological_on_an_even_mixed_atom() -> None:
    s = integrate(density((1, [u, u, v, v])))
    z, g = solve_homological(s)
    assert z == average0(s)
    assert (lie_translation(g) - (s - z)).is_zero


def test_order2_requires_the_normalized_background() -> None:
    wrong = GradedHamiltonian({0: integrate(density((1, [u, u])))})
    with pytest.raises(AlgebraError):
        normal_form_order2(wrong)


def test_generic_first_order_averages_to_zero() -> None:
    result = generic_symbolic_result()
    assert result.z[1].is_zero
    assert result.residuals[1].is_zero
    assert result.residuals[2].is_zero


def test_generic_dispersive_correction() -> None:
    a, b, d1 = sym("a"), sym("b"), sym("d1")
    e5, e6, e7 = sym("e5"), sym("e6"), sym("e7")
    z2 = generic_symbolic_result().z[2]
    sqrt_ab = CoefficientExpr.sqrt(a) * CoefficientExpr.sqrt(b)
    plus = (a * e5 / 2 + b * e6 / 2 - d1**2 / 4 + e7 * sqrt_ab / 2) / (a * b)
    minus = (a * e5 / 2 + b * e6 / 2 - d1**2 / 4 - e7 * sqrt_ab / 2) / (a * b)
    assert z2.coefficient_of([ux, ux]) == plus
    assert z2.coefficient_of([vx, vx]) == minus


def test_generic_dispersive_correction_numeric() -> None:
    result = normal_form_order2(to_uv(GenericModel(a=2, b=3, d1=1)))
    assert result.z[1].is_zero
    assert result.z[2].coefficient_of([ux, ux]) == rational(Fraction(-1, 24))
    assert result.z[2].coefficient_of([vx, vx]) == rational(Fraction(-1, 24))


def test_second_block_is_invariant_under_generator_shifts() -> None:
    # Adding an invariant functional to the first generator leaves the
    # second-order block unchanged whenever the first block vanishes.
    model = GenericModel(a=sym("a"), b=sym("b"), d1=sym("d1"), e1=sym("e1"))
    h1 = to_uv(model).order(1)
    assert average0(h1).is_zero
    shift = poisson_bracket(h1, integrate(density((1, [u, u, u]))), PoissonStructure.gardner())
    assert average0(shift).is_zero


def test_mechanical_z2_displayed_values() -> None:
    a1, a2 = sym("alpha1"), sym("alpha2")
    z2 = mechanical_symbolic_result().z[2]
    assert z2.coefficient_of([u, u, u]) == a1 * sqrt2 / 4
    assert z2.coefficient_of([v, v, v]) == a1 * sqrt2 / 4
    assert z2.coefficient_of([ux, ux]) == a2 / 2
    assert z2.coefficient_of([vx, vx]) == a2 / 2


def test_mechanical_z4_solver_values() -> None:
    a1, a2 = sym("alpha1"), sym("alpha2")
    b1, b2, b3 = sym("beta1"), sym("beta2"), sym("beta3")
    z4 = mechanical_symbolic_result().z[4]
    assert z4.coefficient_of([u, u, u, u]) == b1 / 4 - a1**2 * Fraction(9, 32)
    assert z4.coefficient_of([u, ux, ux]) == (b2 - 3 * a1 * a2) * sqrt2 / 4
    assert z4.coefficient_of([uxx, uxx]) == b3 / 2 - a2**2 / 4
    assert z4.coefficient_of([u, u], [v, v]) == b1 * Fraction(3, 2) - a1**2 * Fraction(9, 4)
    assert z4.coefficient_of([u, u], [u, u]) == a1**2 * Fraction(9, 32)
    assert z4.coefficient_of([v, v], [v, v]) == a1**2 * Fraction(9, 32)


def test_mechanical_alternate_grouping_agrees() -> None:
    result = mechanical_symbolic_result()
    assert average0(result.s2) == result.z[4]


def test_mechanical_residuals_vanish() -> None:
    result = mechanical_symbolic_result()
    assert result.residuals[2].is_zero
    assert result.residuals[4].is_zero


def test_water_wave_blocks() -> None:
    result = water_wave_result()
    first, second = result.z[2], result.z[4]
    assert first.coefficient_of([u, u, u]) == rational(Fraction(1, 4))
    assert first.coefficient_of([ux, ux]) == rational(Fraction(-1, 12))
    assert second.coefficient_of([u, u, u, u]) == rational(Fraction(-1, 64))
    assert second.coefficient_of([u, ux, ux]) == rational(Fraction(-5, 24))
    assert second.coefficient_of([uxx, uxx]) == rational(Fraction(19, 720))
    assert second.coefficient_of([u, u], [v, v]) == rational(Fraction(-1, 8))
    assert second.coefficient_of([u, u], [u, u]) == rational(Fraction(1, 64))


def test_water_wave_displayed_quadratic_atom_reduces_by_parts() -> None:
    # The displayed 5/48 coefficient sits on the u^2 u_xx atom, which the
    # canonical basis rewrites as -2 u u_x^2.
    displayed = integrate(density((Fraction(5, 48), [u, u, uxx])))
    assert displayed == integrate(density((Fraction(-5, 24), [u, ux, ux])))


def test_fpu_blocks_direct_route() -> None:
    alpha, beta = sym("alpha"), sym("beta")
    eps, h = sym("eps"), sym("h")
    sqrt_2eps = sqrt2 * CoefficientExpr.sqrt(eps)
    result = fpu_symbolic_result()
    z1, z2 = result.z[2], result.z[4]
    assert z1.coefficient_of([u, u, u]) == alpha * sqrt_2eps / 12
    assert z1.coefficient_of([v, v, v]) == -(alpha * sqrt_2eps / 12)
    assert z1.coefficient_of([ux, ux]) == -(h**2) / 48
    assert z2.coefficient_of([u, u, u, u]) == beta * eps / 16 - alpha**2 * eps / 32
    assert z2.coefficient_of([u, ux, ux]) == -(alpha * sqrt_2eps * h**2 / 96)
    assert z2.coefficient_of([v, vx, vx]) == alpha * sqrt_2eps * h**2 / 96
    assert z2.coefficient_of([uxx, uxx]) == h**4 / 3840
    assert z2.coefficient_of([u, u], [v, v]) == beta * eps * Fraction(3, 8) - alpha**2 * eps / 4
    assert z2.coefficient_of([u, u], [u, u]) == alpha**2 * eps / 32


def test_fpu_agrees_with_substituted_solver_values_off_the_cross_term() -> None:
    # Substituting the honest chain parameters into the solver's symbolic
    # values reproduces every chain coefficient except the alpha h^2 cross
    # term, whose sign flips because the mixed dispersive atom is odd under
    # the relabel v -> -v.
    alpha, beta = sym("alpha"), sym("beta")
    eps, h = sym("eps"), sym("h")
    a1 = alpha * CoefficientExpr.sqrt(eps) / 3
    a2 = -(h**2) / 24
    b1 = beta * eps / 4
    b3 = h**4 / 720
    fpu = fpu_symbolic_result().z[4]
    assert b1 / 4 - a1**2 * Fraction(9, 32) == fpu.coefficient_of([u, u, u, u])
    assert b3 / 2 - a2**2 / 4 == fpu.coefficient_of([uxx, uxx])
    assert b1 * Fraction(3, 2) - a1**2 * Fraction(9, 4) == fpu.coefficient_of([u, u], [v, v])
    assert a1**2 * Fraction(9, 32) == fpu.coefficient_of([u, u], [u, u])
    cross = (0 - 3 * a1 * a2) * sqrt2 / 4
    assert cross == -fpu.coefficient_of([u, ux, ux])


def test_generalized_chain_two_routes_agree() -> None:
    for p in (3, 4, 5, 6):
        model = FPUContinuumModel(p=p, gamma=sym("gamma"))
        averaged = average0(generalized_fpu(model).order(1))
        assert averaged == generalized_fpu_Z1(p)


def test_generalized_z1_leading_coefficient() -> None:
    gamma, eps, h = sym("gamma"), sym("eps"), sym("h")
    z1 = generalized_fpu_Z1(3)
    c3 = gamma * CoefficientExpr.sqrt(eps) * sqrt2 / 12
    assert z1.coefficient_of([u, u, u]) == c3
    assert z1.coefficient_of([ux, ux]) == -(h**2) / 48
