"""Observable sums of products of integrals and the translation flow."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from wavenf.algebra.coefficients import CoefficientExpr
from wavenf.algebra.densities import density, local, substitute_linear
from wavenf.algebra.numeric import (
    PeriodicField,
    averaged_evaluate,
    evaluate_observable,
    translated_fields,
)
from wavenf.algebra.observables import ObservableExpr, integrate, lie_translation

u, ux = local("u"), local("u", 1)
v, vx = local("v"), local("v", 1)


def test_product_atoms_and_coefficient_lookup() -> None:
    mean_u2 = integrate(density((1, [u, u])))
    mean_v2 = integrate(density((1, [v, v])))
    product = mean_u2 * mean_v2
    assert product.coefficient_of([u, u], [v, v]) == 1
    assert product.coefficient_of([u, u]) == 0
    assert (product - product).is_zero


def test_arithmetic_merges_terms() -> None:
    a = integrate(density((1, [u, v])))
    total = a + a.scaled(2)
    assert total.coefficient_of([u, v]) == 3
    assert (total - a.scaled(3)).is_zero


def test_zero_coefficients_are_dropped() -> None:
    a = integrate(density((1, [u, v])))
    assert (a.scaled(0)).is_zero
    assert not a.is_zero


def test_items_order_is_deterministic() -> None:
    a = integrate(density((1, [u, u, u]), (1, [ux, ux]), (1, [u, v])))
    assert [atoms for atoms, _ in a.items()] == [atoms for atoms, _ in a]


def test_translation_flow_kills_single_direction_integrals() -> None:
    assert lie_translation(integrate(density((1, [u, u])))).is_zero
    assert lie_translation(integrate(density((1, [v, vx, vx])))).is_zero


def test_translation_flow_on_a_mixed_atom() -> None:
    mixed = integrate(density((1, [u, v])))
    assert lie_translation(mixed) == integrate(density((-2, [u, vx])))


def test_translation_flow_matches_quadrature(rng: np.random.Generator) -> None:
    obs = integrate(density((1, [u, u, v]), (Fraction(1, 3), [ux, vx])))
    fields = {
        "u": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
        "v": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
    }
    s = 1e-6
    forward = evaluate_observable(obs, translated_fields(fields, s))
    backward = evaluate_observable(obs, translated_fields(fields, -s))
    finite = (forward - backward) / (2 * s)
    exact = evaluate_observable(lie_translation(obs), fields)
    assert finite == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_averaged_evaluate_of_invariant_is_identity(rng: np.random.Generator) -> None:
    obs = integrate(density((1, [u, u, u])))
    fields = {
        "u": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
        "v": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
    }
    plain = evaluate_observable(obs, fields)
    averaged = averaged_evaluate(obs, fields, samples=64)
    assert averaged == pytest.approx(plain, rel=1e-12)


def test_substitute_linear_flips_odd_terms() -> None:
    p = density((1, [u, u, v]), (1, [v, vx]))
    flipped = substitute_linear(p, {"v": [(-1, "v")]})
    assert flipped.coefficient_of([u, u, v]) == -1
    assert flipped.coefficient_of([v, vx]) == 1


def test_substitute_linear_expands_combinations() -> None:
    r, p_ = local("r"), local("p")
    s2inv = CoefficientExpr.from_rational(Fraction(1, 1)) / CoefficientExpr.sqrt(2)
    dens = density((1, [r, r]))
    out = substitute_linear(dens, {"r": [(s2inv, "u"), (s2inv, "v")]})
    assert out.coefficient_of([u, u]) == Fraction(1, 2)
    assert out.coefficient_of([u, v]) == 1
    assert out.coefficient_of([v, v]) == Fraction(1, 2)


def test_observable_str_is_stable() -> None:
    obs = integrate(density((1, [u, u]), (Fraction(-5, 24), [u, ux, ux])))
    assert str(obs) == str(integrate(density((Fraction(-5, 24), [u, ux, ux]), (1, [u, u]))))
