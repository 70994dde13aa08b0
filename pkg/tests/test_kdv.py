"""Hierarchy integrals, span matching, and the circle integrator."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from wavenf.algebra.coefficients import CoefficientExpr
from wavenf.algebra.densities import density, local
from wavenf.algebra.numeric import PeriodicField, evaluate_density
from wavenf.algebra.observables import integrate
from wavenf.algebra.variational import PoissonStructure, poisson_bracket, vector_field
from wavenf.errors import AlgebraError, BlowUpError
from wavenf.kdv import (
    HierarchyField,
    HierarchyIntegrals,
    SpectralSolverConfig,
    hierarchy_match,
    integrate as integrate_flow,
    single_variable_part,
)
from wavenf.models import FPUContinuumModel, to_uv
from wavenf.normalform import normal_form_mechanical

sym = CoefficientExpr.symbol
w, wx, wxx = local("w"), local("w", 1), local("w", 2)
u, ux = local("u"), local("u", 1)


def test_hierarchy_fields_are_flows_of_the_integrals() -> None:
    gamma = sym("gamma")
    single = PoissonStructure.single()
    integrals = HierarchyIntegrals(gamma)
    flow3 = vector_field(integrals.i1.scaled(Fraction(1, 2)), single)["w"]
    flow5 = vector_field(integrals.i3.scaled(Fraction(1, 2)), single)["w"]
    assert flow3 == HierarchyField(gamma, order=3).density()
    assert flow5 == HierarchyField(gamma, order=5).density()


def test_fifth_order_field_coefficients() -> None:
    gamma = sym("gamma")
    kappa5 = HierarchyField(gamma, order=5).density()
    assert kappa5.coefficient_of([w, w, wx]) == gamma**2 * Fraction(5, 6)
    assert kappa5.coefficient_of([wx, wxx]) == gamma * Fraction(10, 3)
    assert kappa5.coefficient_of([w, local("w", 3)]) == gamma * Fraction(5, 3)
    assert kappa5.coefficient_of([local("w", 5)]) == 1


def test_integrals_commute_pairwise() -> None:
    single = PoissonStructure.single()
    integrals = HierarchyIntegrals(sym("gamma"))
    pairs = (
        (integrals.i0, integrals.i1),
        (integrals.i0, integrals.i3),
        (integrals.i1, integrals.i3),
    )
    for a, b in pairs:
        assert poisson_bracket(a, b, single).is_zero


def test_match_recovers_a_constructed_span_member() -> None:
    integrals = HierarchyIntegrals(36)
    z2 = integrate(density((1, [w, w, w]), (Fraction(-1, 12), [wx, wx])))
    z4 = (
        integrate(integrals.i3.scaled(2))
        + integrate(integrals.i1.scaled(3))
        + integrate(integrals.i0.scaled(5))
    )
    report = hierarchy_match(z2, z4)
    assert report.is_member
    assert report.gamma == 36
    assert report.coefficients["I3"] == 2
    assert report.coefficients["I1"] == 3
    assert report.coefficients["I0"] == 5
    assert report.residual.is_zero


def test_match_reports_mean_products_as_frequency_shifts() -> None:
    integrals = HierarchyIntegrals(36)
    z2 = integrate(density((1, [w, w, w]), (Fraction(-1, 12), [wx, wx])))
    shift = (integrate(density((1, [w, w]))) * integrate(density((1, [w, w])))).scaled(7)
    report = hierarchy_match(z2, integrate(integrals.i3.scaled(2)) + shift)
    assert report.is_member
    assert report.frequency_shifts == shift


def _chain_match(beta: CoefficientExpr):
    model = FPUContinuumModel(alpha=sym("alpha"), beta=beta)
    graded = to_uv(model)
    result = normal_form_mechanical(graded.order(1), graded.order(2))
    return hierarchy_match(
        single_variable_part(result.z[2], "u"),
        single_variable_part(result.z[4], "u"),
    )


def test_chain_match_at_the_critical_coupling() -> None:
    # At beta = (5/6) alpha^2 the cubic-to-quintic ratio is consistent and
    # the leftover is the known dispersive-renormalization residual.
    alpha = sym("alpha")
    eps, h = sym("eps"), sym("h")
    report = _chain_match(alpha**2 * Fraction(5, 6))
    assert report.nonlinear_ratio_consistent
    assert report.gamma == 12 * alpha * CoefficientExpr.sqrt(2) * CoefficientExpr.sqrt(eps) / (h**2)
    expected = integrate(
        density(
            (alpha**2 * eps / 96, [u, u, u, u]),
            (
                -(alpha * CoefficientExpr.sqrt(2) * CoefficientExpr.sqrt(eps) * h**2 / 192),
                [u, ux, ux],
            ),
        )
    )
    assert (report.residual - expected).is_zero
    assert not report.is_member


def test_chain_match_away_from_the_critical_coupling() -> None:
    alpha = sym("alpha")
    report = _chain_match(alpha**2)
    assert not report.nonlinear_ratio_consistent
    assert not report.is_member


def test_ratio_consistency_is_equivalent_to_the_critical_coupling() -> None:
    for num, den, expected in ((5, 6, True), (1, 1, False), (5, 3, False)):
        report = _chain_match(sym("alpha") ** 2 * Fraction(num, den))
        assert report.nonlinear_ratio_consistent is expected


def test_linear_flow_matches_spectral_phases() -> None:
    w0 = PeriodicField.from_harmonics({1: 0.3, 3: 0.1}, {2: 0.2}, 64)
    cfg = SpectralSolverConfig(size=64, dt=1e-3, t_end=1.0)
    traj = integrate_flow(HierarchyField(0).density(), w0, cfg)
    wavenumbers = 2j * np.pi * np.arange(cfg.size // 2 + 1)
    exact = np.fft.irfft(
        np.fft.rfft(w0.values) * np.exp(cfg.t_end * wavenumbers**3), n=cfg.size
    )
    assert float(np.max(np.abs(traj.final.values - exact))) <= 1e-10


def test_translation_flow_shifts_the_profile() -> None:
    w0 = PeriodicField.from_harmonics({1: 0.3, 3: 0.1}, {2: 0.2}, 64)
    cfg = SpectralSolverConfig(size=64, dt=1e-3, t_end=0.37)
    traj = integrate_flow(density((1, [wx])), w0, cfg)
    err = float(np.max(np.abs(traj.final.values - w0.shifted(cfg.t_end).values)))
    assert err <= 1e-10


def test_integrals_conserved_along_the_nonlinear_flow() -> None:
    gamma = 6
    w0 = PeriodicField.from_harmonics({1: 0.25, 2: 0.06}, {1: 0.05}, 256)
    cfg = SpectralSolverConfig(size=256, dt=1e-4, t_end=1.0)
    traj = integrate_flow(HierarchyField(gamma).density(), w0, cfg)
    integrals = HierarchyIntegrals(gamma)
    for dens in (integrals.i0, integrals.i1, integrals.i3):
        before = evaluate_density(dens, {"w": traj.field(0)})
        after = evaluate_density(dens, {"w": traj.final})
        assert abs(after - before) / max(abs(before), 1e-12) <= 1e-6


def test_schemes_converge_to_each_other() -> None:
    w0 = PeriodicField.from_harmonics({1: 0.25, 2: 0.06}, {1: 0.05}, 128)
    rhs = HierarchyField(6).density()

    def gap(dt: float) -> float:
        finals = []
        for scheme in ("ETDRK4", "IFRK4"):
            cfg = SpectralSolverConfig(size=128, dt=dt, t_end=0.2, scheme=scheme)
            finals.append(integrate_flow(rhs, w0, cfg).final.values)
        return float(np.max(np.abs(finals[0] - finals[1])))

    coarse, fine = gap(1e-4), gap(2e-5)
    assert fine <= 1e-9
    assert coarse / fine >= 100.0


def test_symbolic_coefficients_evaluate_through_params() -> None:
    gamma = sym("gamma")
    w0 = PeriodicField.from_harmonics({1: 0.1}, None, 64)
    cfg = SpectralSolverConfig(size=64, dt=1e-3, t_end=0.05)
    with_params = integrate_flow(
        HierarchyField(gamma).density(), w0, cfg, params={"gamma": 6.0}
    )
    numeric = integrate_flow(HierarchyField(6).density(), w0, cfg)
    assert np.allclose(with_params.final.values, numeric.final.values, atol=1e-12)


def test_blow_up_raises_with_first_bad_time() -> None:
    w0 = PeriodicField.from_harmonics({1: 0.31, 2: 0.06}, {1: 0.05}, 64)
    cfg = SpectralSolverConfig(size=64, dt=0.05, t_end=5.0)
    with pytest.raises(BlowUpError) as info:
        integrate_flow(HierarchyField(600).density(), w0, cfg)
    assert info.value.time is not None
    assert 0 < info.value.time <= cfg.t_end


def test_config_guards() -> None:
    with pytest.raises(AlgebraError):
        SpectralSolverConfig(size=48)
    with pytest.raises(AlgebraError):
        SpectralSolverConfig(dt=-1e-3)
    with pytest.raises(AlgebraError):
        SpectralSolverConfig(scheme="rk4")


def test_initial_state_guards() -> None:
    cfg = SpectralSolverConfig(size=64, dt=1e-3, t_end=0.1)
    rhs = HierarchyField(6).density()
    biased = PeriodicField(np.full(64, 0.5))
    with pytest.raises(AlgebraError):
        integrate_flow(rhs, biased, cfg)
    ragged = PeriodicField.from_harmonics({50: 0.1}, None, 256)
    with pytest.raises(AlgebraError):
        integrate_flow(rhs, ragged, cfg)


def test_single_variable_part_extracts_one_side() -> None:
    mixed = integrate(
        density((1, [u, u, u]), (2, [local("v"), local("v")]), (3, [u, local("v")]))
    )
    left = single_variable_part(mixed, "u")
    assert left.coefficient_of([u, u, u]) == 1
    assert left.coefficient_of([local("v"), local("v")]) == 0
