"""Model builders, the (u, v) change of variables, and TOML loading."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from wavenf.algebra.coefficients import CoefficientExpr
from wavenf.algebra.densities import density, local, substitute_linear
from wavenf.algebra.numeric import PeriodicField, evaluate_observable
from wavenf.algebra.variational import PoissonStructure, poisson_bracket
from wavenf.errors import AlgebraError, ParseError
from wavenf.models import (
    FPUContinuumModel,
    GenericModel,
    MechanicalModel,
    WaterWaveModel,
    fpu_continuum,
    fpu_mechanical_equivalent,
    generalized_fpu,
    load_model,
    to_uv,
    water_waves,
)

sym = CoefficientExpr.symbol
sqrt2 = CoefficientExpr.sqrt(2)

u, ux = local("u"), local("u", 1)
v, vx = local("v"), local("v", 1)


def _symbolic_fpu() -> FPUContinuumModel:
    return FPUContinuumModel(alpha=sym("alpha"), beta=sym("beta"))


def test_fpu_first_order_block() -> None:
    alpha = sym("alpha")
    eps, h = sym("eps"), sym("h")
    a3 = alpha * sqrt2 * CoefficientExpr.sqrt(eps) / 12
    h1 = fpu_continuum(_symbolic_fpu()).order(1)
    assert h1.coefficient_of([u, u, u]) == a3
    assert h1.coefficient_of([v, v, v]) == -a3
    assert h1.coefficient_of([u, u, v]) == -3 * a3
    assert h1.coefficient_of([u, v, v]) == 3 * a3
    assert h1.coefficient_of([ux, ux]) == -(h**2) / 48
    assert h1.coefficient_of([vx, vx]) == -(h**2) / 48
    assert h1.coefficient_of([ux, vx]) == -(h**2) / 24


def test_fpu_background_is_normalized() -> None:
    h0 = fpu_continuum(_symbolic_fpu()).order(0)
    assert h0.coefficient_of([u, u]) == Fraction(1, 2)
    assert h0.coefficient_of([v, v]) == Fraction(1, 2)
    assert h0.coefficient_of([u, v]) == 0


def test_fpu_mechanical_equivalent_parameters() -> None:
    alpha, beta = sym("alpha"), sym("beta")
    eps, h = sym("eps"), sym("h")
    mech = fpu_mechanical_equivalent(_symbolic_fpu())
    assert mech.alpha1 == alpha * CoefficientExpr.sqrt(eps) / 3
    assert mech.alpha2 == -(h**2) / 24
    assert mech.beta1 == beta * eps / 4
    assert mech.beta2 == CoefficientExpr.from_rational(Fraction(0))
    assert mech.beta3 == h**4 / 720


def test_fpu_cubic_sector_flips_to_mechanical() -> None:
    # The chain nonlinearity rides the momentum slot, the mechanical one
    # the coordinate slot; the cubic sectors are related by v -> -v while
    # the dispersive cross term u_x v_x is left unchanged by the relabel.
    fpu_h1 = fpu_continuum(_symbolic_fpu()).order(1)
    mech_h1 = to_uv(fpu_mechanical_equivalent(_symbolic_fpu())).order(1)
    for atom in ([u, u, u], [v, v, v], [u, u, v], [u, v, v]):
        odd = sum(1 for f in atom if f.var == "v") % 2
        expected = -fpu_h1.coefficient_of(atom) if odd else fpu_h1.coefficient_of(atom)
        assert mech_h1.coefficient_of(atom) == expected
    assert mech_h1.coefficient_of([ux, vx]) == fpu_h1.coefficient_of([ux, vx])


def test_generalized_reduces_to_the_cubic_chain() -> None:
    alpha = sym("alpha")
    cubic = generalized_fpu(FPUContinuumModel(alpha=alpha, p=3)).order(1)
    direct = fpu_continuum(FPUContinuumModel(alpha=alpha)).order(1)
    assert (cubic - direct).is_zero


def test_generalized_requires_high_degree_for_gamma_default() -> None:
    with pytest.raises(AlgebraError):
        generalized_fpu(FPUContinuumModel(p=5))


def test_water_wave_first_order_block() -> None:
    h1 = water_waves().order(1)
    quarter = CoefficientExpr.from_rational(Fraction(1, 4))
    assert h1.coefficient_of([u, u, u]) == quarter
    assert h1.coefficient_of([v, v, v]) == quarter
    assert h1.coefficient_of([u, u, v]) == -quarter
    assert h1.coefficient_of([u, v, v]) == -quarter
    assert h1.coefficient_of([ux, ux]) == Fraction(-1, 12)
    assert h1.coefficient_of([ux, vx]) == Fraction(1, 6)


def test_change_of_variables_preserves_brackets(rng: np.random.Generator) -> None:
    # Brackets in the (q_x, p) chart with the off-diagonal structure equal
    # brackets of the substituted densities in the decoupled (u, v) chart.
    qx, p = local("q_x"), local("p")
    half = CoefficientExpr.from_rational(Fraction(1, 1)) / sqrt2
    mapping = {
        "q_x": [(half, "u"), (half, "v")],
        "p": [(half, "u"), (-half, "v")],
    }
    cases = (
        (density((1, [qx, qx, p])), density((1, [local("q_x", 1), p]))),
        (density((1, [qx, p, p])), density((Fraction(1, 2), [qx, qx]))),
    )
    base_u = PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.3)
    base_v = PeriodicField.random_trig(rng, max_harmonic=3, amplitude=0.3)
    s = 2**0.5
    fields_rp = {
        "q_x": PeriodicField((base_u.values + base_v.values) / s),
        "p": PeriodicField((base_u.values - base_v.values) / s),
    }
    fields_uv = {"u": base_u, "v": base_v}
    for f_rp, g_rp in cases:
        direct = evaluate_observable(
            poisson_bracket(f_rp, g_rp, PoissonStructure.standard_rp()), fields_rp
        )
        mapped = evaluate_observable(
            poisson_bracket(
                substitute_linear(f_rp, mapping),
                substitute_linear(g_rp, mapping),
                PoissonStructure.gardner(),
            ),
            fields_uv,
        )
        assert mapped == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_generic_symbolic_background_requires_positive_sign() -> None:
    with pytest.raises(AlgebraError):
        to_uv(GenericModel(a=sym("a"), b=sym("b"), sigma=-1))


def test_generic_numeric_background_sign_checks() -> None:
    with pytest.raises(AlgebraError):
        to_uv(GenericModel(a=2, b=-3))
    to_uv(GenericModel(a=-2, b=-3, sigma=-1))


def test_degree_below_three_is_rejected() -> None:
    with pytest.raises(AlgebraError):
        FPUContinuumModel(p=2)


def test_nonpositive_scales_are_rejected() -> None:
    with pytest.raises(AlgebraError):
        FPUContinuumModel(eps=0)
    with pytest.raises(AlgebraError):
        FPUContinuumModel(h=-1)


def test_load_model_all_samples(models_dir: Path) -> None:
    expected = {
        "fpu.toml": FPUContinuumModel,
        "waterwaves.toml": WaterWaveModel,
        "generic.toml": GenericModel,
        "mechanical.toml": MechanicalModel,
        "zero.toml": FPUContinuumModel,
    }
    for name, cls in expected.items():
        assert isinstance(load_model(models_dir / name), cls)


def test_load_model_parses_rationals_and_symbols(models_dir: Path) -> None:
    model = load_model(models_dir / "fpu.toml")
    assert model.alpha == CoefficientExpr.from_rational(Fraction(1, 4))
    assert model.beta == CoefficientExpr.from_rational(Fraction(5, 96))
    generic = load_model(models_dir / "generic.toml")
    assert generic.d1 == sym("d1")


def test_load_model_rejects_bad_files(tmp_path: Path) -> None:
    cases = {
        "empty.toml": "",
        "two.toml": "[fpu]\n[generic]\n",
        "unknown.toml": "[fpu]\nzeta = 1\n",
        "bool.toml": "[fpu]\nalpha = true\n",
        "sigma.toml": "[generic]\nsigma = 2\n",
        "degree.toml": "[fpu]\np = 2\n",
        "ww.toml": "[waterwaves]\ngravity = 1\n",
        "section.toml": "[unknown]\n",
        "syntax.toml": "[fpu\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(ParseError):
            load_model(path)


def test_load_model_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ParseError):
        load_model(tmp_path / "absent.toml")
