"""Densities, grading, and canonicalization modulo total derivatives."""

from __future__ import annotations

import math
import pickle
from fractions import Fraction

import numpy as np
import pytest

from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    Monomial,
    density,
    grade_decomposition,
    local,
)
from wavenf.algebra.numeric import PeriodicField, evaluate_density, evaluate_observable
from wavenf.algebra.observables import ObservableExpr, integrate
from wavenf.errors import AlgebraError, MixedNonlocalError

u, ux, uxx = local("u"), local("u", 1), local("u", 2)
v, vx = local("v"), local("v", 1)


def test_monomials_merge_and_cancel() -> None:
    p = density((1, [u, ux]), (2, [ux, u]))
    assert len(p.terms) == 1
    assert p.coefficient_of([u, ux]) == 3
    assert density((1, [u]), (-1, [u])).is_zero


def test_grading_counts_fields_and_derivatives() -> None:
    p = density((1, [u, u, u]), (1, [ux, ux]), (1, [u, u, u, u]), (1, [uxx, uxx]))
    grades = grade_decomposition(p)
    assert set(grades) == {2, 4}
    assert grades[2].coefficient_of([u, u, u]) == 1
    assert grades[2].coefficient_of([ux, ux]) == 1
    assert grades[4].coefficient_of([uxx, uxx]) == 1


def test_coordinate_slot_counts_the_implicit_derivative() -> None:
    qx = local("q_x")
    p = density((1, [qx, qx]), (1, [local("p"), local("p")]))
    grades = grade_decomposition(p)
    assert set(grades) == {0}


def test_total_derivatives_integrate_to_zero() -> None:
    assert integrate(density((1, [u, ux]))).is_zero
    assert integrate(density((1, [local("u", 3)]))).is_zero


def test_integration_by_parts_frozen_identities() -> None:
    assert integrate(density((1, [u, uxx]))) == integrate(density((-1, [ux, ux])))
    assert integrate(density((1, [u, u, uxx]))) == integrate(
        density((-2, [u, ux, ux]))
    )
    assert integrate(density((1, [ux, v]))) == integrate(density((-1, [u, vx])))


def test_canonical_atoms_are_fixed_points() -> None:
    obs = integrate(density((1, [u, ux, ux]), (2, [u, u, v, vx])))
    for atoms, _ in obs:
        for atom in atoms:
            again = integrate(density((1, list(atom))))
            assert again == ObservableExpr.from_atom(atom)


def test_exact_antiderivative_mean_splits() -> None:
    inner = AntiDerivFactor((u, ux))
    obs = integrate(density((1, [vx, inner])))
    assert obs == integrate(density((Fraction(1, 2), [u, u, vx])))


def test_mixed_antiderivative_is_rejected() -> None:
    with pytest.raises(MixedNonlocalError):
        AntiDerivFactor((u, v))


def test_nested_antiderivative_is_rejected() -> None:
    with pytest.raises(AlgebraError):
        AntiDerivFactor((u, AntiDerivFactor((u,))))


def test_antiderivative_pairing_value() -> None:
    size = 256
    grid = np.arange(size) / size
    fields = {
        "u": PeriodicField(np.cos(2 * np.pi * grid)),
        "v": PeriodicField(np.sin(2 * np.pi * grid)),
    }
    obs = integrate(density((1, [v, AntiDerivFactor((u,))])))
    got = evaluate_observable(obs, fields)
    assert got == pytest.approx(1 / (4 * math.pi), rel=1e-12)


def test_canonicalization_preserves_values(rng: np.random.Generator) -> None:
    fields = {
        "u": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
        "v": PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.4),
    }
    for _ in range(25):
        picks = []
        for _ in range(int(rng.integers(1, 4))):
            factors = [
                local("uv"[int(rng.integers(0, 2))], int(rng.integers(0, 4)))
                for _ in range(int(rng.integers(2, 5)))
            ]
            picks.append((Fraction(int(rng.integers(-6, 7)) or 1, 3), factors))
        dens = density(*picks)
        direct = evaluate_density(dens, fields)
        reduced = evaluate_observable(integrate(dens), fields)
        assert reduced == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_monomial_is_immutable() -> None:
    m = Monomial(1, [u, ux])
    with pytest.raises(AttributeError):
        m.coeff = 2


def test_pickle_roundtrips() -> None:
    dens = density((Fraction(5, 96), [u, ux, ux]), (1, [v, AntiDerivFactor((u,))]))
    obs = integrate(dens)
    for thing in (dens.terms[0], dens, obs):
        clone = pickle.loads(pickle.dumps(thing))
        assert str(clone) == str(thing)


def test_unknown_variable_is_rejected() -> None:
    with pytest.raises(AlgebraError):
        local("phi")


def test_string_form_is_deterministic() -> None:
    p = density((1, [ux, u]), (Fraction(-1, 2), [v, v]))
    assert str(p) == str(density((Fraction(-1, 2), [v, v]), (1, [u, ux])))
