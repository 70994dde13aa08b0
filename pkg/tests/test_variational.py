"""Variational derivatives, Poisson structures and brackets."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from wavenf.algebra.densities import DensityPolynomial, density, local
from wavenf.algebra.numeric import (
    PeriodicField,
    evaluate_density,
    evaluate_observable,
    gateaux_derivative,
)
from wavenf.algebra.observables import integrate, lie_translation
from wavenf.algebra.variational import (
    PoissonStructure,
    poisson_bracket,
    variational_derivative,
    vector_field,
)
from wavenf.errors import AlgebraError
from wavenf.normalform import background_k0

u, ux, uxx = local("u"), local("u", 1), local("u", 2)
v, vx = local("v"), local("v", 1)


def _random_fields(rng: np.random.Generator) -> dict[str, PeriodicField]:
    return {
        name: PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4)
        for name in ("u", "v", "w")
    }


def _random_density(rng: np.random.Generator, variables: tuple[str, ...]) -> DensityPolynomial:
    picks = []
    for _ in range(int(rng.integers(1, 3))):
        factors = [
            local(variables[int(rng.integers(0, len(variables)))], int(rng.integers(0, 2)))
            for _ in range(int(rng.integers(2, 4)))
        ]
        picks.append((Fraction(int(rng.integers(-6, 7)) or 1, 2), factors))
    return density(*picks)


def test_euler_operator_frozen_example() -> None:
    got = variational_derivative(density((1, [u, ux, ux])), "u").plain()
    assert got == density((-1, [ux, ux]), (-2, [u, uxx]))


def test_euler_operator_kills_total_derivatives() -> None:
    assert variational_derivative(density((2, [u, ux])), "u").is_zero
    assert variational_derivative(density((1, [local("u", 4)])), "u").is_zero


def test_gradient_of_integral_product_has_weights() -> None:
    product = integrate(density((1, [u, u]))) * integrate(density((1, [v, v])))
    grad = variational_derivative(product, "u")
    assert not grad.is_zero
    with pytest.raises(AlgebraError):
        grad.plain()


def test_gateaux_matches_variational_derivative(rng: np.random.Generator) -> None:
    probe = density((1, [local("w")]))
    worst = 0.0
    for _ in range(10):
        dens = _random_density(rng, ("u", "v"))
        var = "u" if rng.integers(0, 2) else "v"
        fields = _random_fields(rng)
        direction = PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4)

        def value_fn(f: PeriodicField) -> float:
            trial = dict(fields)
            trial[var] = f
            return evaluate_density(dens, trial)

        finite = gateaux_derivative(value_fn, fields[var], direction)
        pairing = variational_derivative(dens, var).plain() * probe
        exact = evaluate_density(pairing, {**fields, "w": direction})
        worst = max(worst, abs(finite - exact) / max(1.0, abs(exact)))
    assert worst <= 1e-6


def test_structures_are_skew_adjoint() -> None:
    for structure in (
        PoissonStructure.gardner(),
        PoissonStructure.single(),
        PoissonStructure.standard_rp(),
    ):
        assert structure.is_skew_adjoint()


def test_background_flow_is_translation() -> None:
    flow = vector_field(
        density((Fraction(1, 2), [u, u]), (Fraction(1, 2), [v, v])),
        PoissonStructure.gardner(),
    )
    assert flow["u"] == density((1, [ux]))
    assert flow["v"] == density((-1, [vx]))


def test_bracket_with_background_is_the_translation_derivative() -> None:
    structure = PoissonStructure.gardner()
    for target in (
        integrate(density((1, [u, v]))),
        integrate(density((1, [u, u, v]), (Fraction(1, 3), [ux, vx]))),
    ):
        assert poisson_bracket(target, background_k0(), structure) == lie_translation(
            target
        )


def test_bracket_antisymmetry_numeric(rng: np.random.Generator) -> None:
    structure = PoissonStructure.gardner()
    worst = 0.0
    for _ in range(6):
        f = _random_density(rng, ("u", "v"))
        g = _random_density(rng, ("u", "v"))
        fields = _random_fields(rng)
        forward = evaluate_observable(poisson_bracket(f, g, structure), fields)
        backward = evaluate_observable(poisson_bracket(g, f, structure), fields)
        worst = max(worst, abs(forward + backward) / max(1.0, abs(forward)))
    assert worst <= 1e-9


def test_jacobi_identity_numeric(rng: np.random.Generator) -> None:
    cases = (
        (PoissonStructure.gardner(), ("u", "v")),
        (PoissonStructure.single(), ("w",)),
    )
    worst = 0.0
    for i in range(6):
        structure, variables = cases[i % 2]
        f = _random_density(rng, variables)
        g = _random_density(rng, variables)
        h = _random_density(rng, variables)
        fields = _random_fields(rng)
        t1 = evaluate_observable(
            poisson_bracket(poisson_bracket(f, g, structure), integrate(h), structure),
            fields,
        )
        t2 = evaluate_observable(
            poisson_bracket(poisson_bracket(g, h, structure), integrate(f), structure),
            fields,
        )
        t3 = evaluate_observable(
            poisson_bracket(poisson_bracket(h, f, structure), integrate(g), structure),
            fields,
        )
        scale = max(1.0, abs(t1), abs(t2), abs(t3))
        worst = max(worst, abs(t1 + t2 + t3) / scale)
    assert worst <= 1e-9


def test_bracket_of_commuting_pair_is_zero() -> None:
    single = PoissonStructure.single()
    i0 = density((1, [local("w"), local("w")]))
    assert poisson_bracket(i0, i0, single).is_zero
