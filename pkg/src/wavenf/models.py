"""Concrete graded Hamiltonians near the wave equation.

Builders for the generic polynomial family, the mechanical family (no
momentum outside the background), the FPU continuum with its generalized
chain, and the water-wave expansion.  Models are written in the slot
variables ``q_x`` and ``p``; ``to_uv`` performs the background
normalization and the Riemann substitution

    q_x = (u + v)/sqrt(2),    p = (u - v)/sqrt(2),

returning a :class:`~wavenf.normalform.GradedHamiltonian` over ``(u, v)``
with the Gardner structure.  Model files are TOML with one of the
sections ``[generic]``, ``[mechanical]``, ``[fpu]``, ``[waterwaves]``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from functools import singledispatch
from pathlib import Path

from wavenf.algebra.coefficients import (
    CoefficientExpr,
    Scalar,
    _as_expr,
    parse_coefficient,
)
from wavenf.algebra.densities import (
    DensityPolynomial,
    Monomial,
    density,
    local,
    substitute_linear,
)
from wavenf.algebra.observables import integrate
from wavenf.errors import AlgebraError, ParseError
from wavenf.normalform import GradedHamiltonian

_SQRT2 = CoefficientExpr.sqrt(2)
_INV_SQRT2 = _SQRT2 / 2

#: Riemann-invariant substitution: q_x and p into the traveling pair.
_RIEMANN = {
    "q_x": ((_INV_SQRT2, "u"), (_INV_SQRT2, "v")),
    "p": ((_INV_SQRT2, "u"), (-_INV_SQRT2, "v")),
}


def _coerced(value: Scalar | CoefficientExpr) -> CoefficientExpr:
    return _as_expr(value)


@dataclass(frozen=True)
class GenericModel:
    """Generic graded perturbation of the wave background.

    ``a``, ``b`` are the background coefficients (``ab > 0`` assumed,
    elliptic case), ``c`` multiplies the momentum functional removed by
    the translation-flow normalization, and ``d1``, ``e1..e7``,
    ``f1..f3``, ``g1..g14`` are the perturbation coefficients of grades
    one through four.  ``sigma`` is the common sign of ``a`` and ``b``.
    """

    a: Scalar | CoefficientExpr = 1
    b: Scalar | CoefficientExpr = 1
    c: Scalar | CoefficientExpr = 0
    d1: Scalar | CoefficientExpr = 0
    e1: Scalar | CoefficientExpr = 0
    e2: Scalar | CoefficientExpr = 0
    e3: Scalar | CoefficientExpr = 0
    e4: Scalar | CoefficientExpr = 0
    e5: Scalar | CoefficientExpr = 0
    e6: Scalar | CoefficientExpr = 0
    e7: Scalar | CoefficientExpr = 0
    f1: Scalar | CoefficientExpr = 0
    f2: Scalar | CoefficientExpr = 0
    f3: Scalar | CoefficientExpr = 0
    g1: Scalar | CoefficientExpr = 0
    g2: Scalar | CoefficientExpr = 0
    g3: Scalar | CoefficientExpr = 0
    g4: Scalar | CoefficientExpr = 0
    g5: Scalar | CoefficientExpr = 0
    g6: Scalar | CoefficientExpr = 0
    g7: Scalar | CoefficientExpr = 0
    g8: Scalar | CoefficientExpr = 0
    g9: Scalar | CoefficientExpr = 0
    g10: Scalar | CoefficientExpr = 0
    g11: Scalar | CoefficientExpr = 0
    g12: Scalar | CoefficientExpr = 0
    g13: Scalar | CoefficientExpr = 0
    g14: Scalar | CoefficientExpr = 0
    sigma: int = 1

    def __post_init__(self) -> None:
        if self.sigma not in (1, -1):
            raise AlgebraError("sigma must be +1 or -1")
        for f in dataclasses.fields(self):
            if f.name == "sigma":
                continue
            object.__setattr__(self, f.name, _coerced(getattr(self, f.name)))


@dataclass(frozen=True)
class MechanicalModel:
    """Perturbation with no momentum outside the background.

    Odd grades vanish; the grade-two and grade-four densities are
    ``alpha1 q_x^3 + alpha2 q_xx^2`` and
    ``beta1 q_x^4 + beta2 q_xx^2 q_x + beta3 q_xxx^2``.
    """

    alpha1: Scalar | CoefficientExpr = 0
    alpha2: Scalar | CoefficientExpr = 0
    beta1: Scalar | CoefficientExpr = 0
    beta2: Scalar | CoefficientExpr = 0
    beta3: Scalar | CoefficientExpr = 0

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, _coerced(getattr(self, f.name)))


@dataclass(frozen=True)
class FPUContinuumModel:
    """Continuum interpolation of the FPU chain.

    ``alpha``, ``beta`` are the cubic and quartic potential strengths,
    ``eps`` the specific-amplitude scale, ``h`` the lattice spacing, and
    ``p`` the nonlinearity degree; ``gamma`` is the strength of the
    single-term potential of the generalized chain (degree ``p >= 5``).
    Defaults keep ``eps`` and ``h`` symbolic.
    """

    alpha: Scalar | CoefficientExpr = 0
    beta: Scalar | CoefficientExpr = 0
    eps: Scalar | CoefficientExpr | None = None
    h: Scalar | CoefficientExpr | None = None
    p: int = 4
    gamma: Scalar | CoefficientExpr | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _coerced(self.alpha))
        object.__setattr__(self, "beta", _coerced(self.beta))
        eps = CoefficientExpr.symbol("eps") if self.eps is None else _coerced(self.eps)
        h = CoefficientExpr.symbol("h") if self.h is None else _coerced(self.h)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "h", h)
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _coerced(self.gamma))
        if self.p < 3:
            raise AlgebraError("nonlinearity degree must be at least 3")
        for name, value in (("eps", eps), ("h", h)):
            if value.is_rational and value.as_fraction() <= 0:
                raise AlgebraError(f"{name} must be positive")


@dataclass(frozen=True)
class WaterWaveModel:
    """Marker for the fixed water-wave expansion (no free parameters)."""


def _riemann(dens: DensityPolynomial) -> DensityPolynomial:
    return substitute_linear(dens, _RIEMANN)


def _sqrt_abs(value: CoefficientExpr, name: str) -> CoefficientExpr:
    """Square root of ``|value|`` for a rational or a bare symbol.

    Bare parameter symbols are taken positive, so their absolute value
    is the symbol itself; sign-reversed backgrounds need numeric
    coefficients.
    """
    if value.is_rational:
        frac = value.as_fraction()
        if frac == 0:
            raise AlgebraError(f"background coefficient {name} vanishes")
        return CoefficientExpr.sqrt(abs(frac))
    symbols = value.symbols()
    if len(symbols) == 1 and value == CoefficientExpr.symbol(next(iter(symbols))):
        return CoefficientExpr.sqrt(value)
    raise AlgebraError(
        f"background coefficient {name} must be a number or a bare symbol"
    )


def _rescale_net(
    dens: DensityPolynomial,
    inv_sqrt_b: CoefficientExpr,
    inv_sqrt_a: CoefficientExpr,
    sigma: int,
) -> DensityPolynomial:
    """Divide every q-type factor by sqrt|b| and every p-type factor by
    sqrt|a|, with the overall sign sigma (the normalization that brings
    the background to the unit wave form)."""
    out = []
    for m in dens.terms:
        scale = _as_expr(sigma)
        for f in m.factors:
            if f.var == "q_x":
                scale = scale * inv_sqrt_b
            elif f.var == "p":
                scale = scale * inv_sqrt_a
            else:
                raise AlgebraError(f"unexpected variable {f.var!r} in a slot density")
        out.append(m.scaled(scale))
    return DensityPolynomial(out)


@singledispatch
def to_uv(model) -> GradedHamiltonian:
    """Normalize the background and substitute Riemann invariants."""
    raise TypeError(f"no (u, v) builder for {type(model).__name__}")


@to_uv.register
def _(model: GenericModel) -> GradedHamiltonian:
    if model.a.is_rational and model.b.is_rational:
        a = model.a.as_fraction()
        b = model.b.as_fraction()
        if a * b <= 0:
            raise AlgebraError("need ab > 0 (elliptic background)")
        if (1 if a > 0 else -1) != model.sigma:
            raise AlgebraError("sigma does not match the sign of a")
    else:
        if model.sigma != 1:
            raise AlgebraError(
                "symbolic background coefficients are taken positive; sigma must be 1"
            )
        for name, value in (("a", model.a), ("b", model.b)):
            if value.is_rational and value.as_fraction() <= 0:
                raise AlgebraError(f"need {name} > 0 alongside a symbolic partner")
    qx = local("q_x")
    qxx = local("q_x", 1)
    qxxx = local("q_x", 2)
    qxxxx = local("q_x", 3)
    p = local("p")
    px = local("p", 1)
    pxx = local("p", 2)
    half = Fraction(1, 2)
    # the c * (q_x p) piece is erased by the translation-flow normalization
    slots = density(
        (model.a * half, [p, p]),
        (model.b * half, [qx, qx]),
        (model.d1, [qx, px]),
        (model.e1, [qx, qx, qx]),
        (model.e2, [p, p, p]),
        (model.e3, [qx, qx, p]),
        (model.e4, [qx, p, p]),
        (model.e5, [qxx, qxx]),
        (model.e6, [px, px]),
        (model.e7, [qxx, px]),
        (model.f1, [qx, qx, px]),
        (model.f2, [qxx, p, p]),
        (model.f3, [qxx, pxx]),
        (model.g1, [qx, qx, qx, qx]),
        (model.g2, [p, p, p, p]),
        (model.g3, [qx, qx, p, p]),
        (model.g4, [qx, qx, qx, p]),
        (model.g5, [qx, p, p, p]),
        (model.g6, [qxx, qxx, qx]),
        (model.g7, [qxx, qxx, p]),
        (model.g8, [px, px, qx]),
        (model.g9, [px, px, p]),
        (model.g10, [qxxx, p, p]),
        (model.g11, [qx, qx, pxx]),
        (model.g12, [qxxx, qxxx]),
        (model.g13, [pxx, pxx]),
        (model.g14, [qxxxx, px]),
    )
    rescaled = _rescale_net(
        slots,
        1 / _sqrt_abs(model.b, "b"),
        1 / _sqrt_abs(model.a, "a"),
        model.sigma,
    )
    return GradedHamiltonian.from_density(_riemann(rescaled))


@to_uv.register
def _(model: MechanicalModel) -> GradedHamiltonian:
    qx = local("q_x")
    qxx = local("q_x", 1)
    qxxx = local("q_x", 2)
    p = local("p")
    half = Fraction(1, 2)
    slots = density(
        (half, [p, p]),
        (half, [qx, qx]),
        (model.alpha1, [qx, qx, qx]),
        (model.alpha2, [qxx, qxx]),
        (model.beta1, [qx, qx, qx, qx]),
        (model.beta2, [qxx, qxx, qx]),
        (model.beta3, [qxxx, qxxx]),
    )
    return GradedHamiltonian.from_density(_riemann(slots), scale=2)


@to_uv.register
def _(model: FPUContinuumModel) -> GradedHamiltonian:
    if model.p > 4:
        return generalized_fpu(model)
    return fpu_continuum(model)


@to_uv.register
def _(model: WaterWaveModel) -> GradedHamiltonian:
    return water_waves()


def fpu_continuum(model: FPUContinuumModel) -> GradedHamiltonian:
    """Graded Hamiltonian of the FPU continuum, alpha-beta potential.

    Expands (1/eps) phi(sqrt(eps) R) - (1/2) S Delta_h S through grade
    four, with R in the momentum slot, S_x in the coordinate slot and the
    discrete-Laplacian dispersion expanded to h^4.
    """
    if model.p > 4:
        raise AlgebraError("nonlinearity degree above 4: use generalized_fpu")
    eps = model.eps
    h = model.h
    sqrt_eps = CoefficientExpr.sqrt(eps)
    r = local("p")
    sx = local("q_x")
    sxx = local("q_x", 1)
    sxxx = local("q_x", 2)
    half = Fraction(1, 2)
    slots = density(
        (half, [r, r]),
        (half, [sx, sx]),
        (model.alpha * sqrt_eps / 3, [r, r, r]),
        (model.beta * eps / 4, [r, r, r, r]),
        (-(h * h) / 24, [sxx, sxx]),
        (h**4 / 720, [sxxx, sxxx]),
    )
    return GradedHamiltonian.from_density(_riemann(slots), scale=2)


def fpu_mechanical_equivalent(model: FPUContinuumModel) -> MechanicalModel:
    """Mechanical parameters whose normal form matches the FPU continuum.

    The FPU nonlinearity sits on the momentum slot rather than the
    coordinate slot, so the cubic sectors agree under v -> -v (a
    background-preserving relabel).  The first-order normal forms then
    coincide, as do all second-order coefficients free of an alpha * h^2
    cross factor; the cross coefficient flips sign because the mixed
    dispersive term u_x v_x is not invariant under the relabel.  For the
    exact second order, run the solver on :func:`fpu_continuum` output
    directly.
    """
    eps = model.eps
    h = model.h
    return MechanicalModel(
        alpha1=model.alpha * CoefficientExpr.sqrt(eps) / 3,
        alpha2=-(h * h) / 24,
        beta1=model.beta * eps / 4,
        beta2=0,
        beta3=h**4 / 720,
    )


def _half_integer_power(base: CoefficientExpr, half_powers: int) -> CoefficientExpr:
    """base^(half_powers/2) with an exact square-root symbol when odd."""
    out = base ** (half_powers // 2)
    if half_powers % 2:
        out = out * CoefficientExpr.sqrt(base)
    return out


def generalized_fpu(model: FPUContinuumModel) -> GradedHamiltonian:
    """Leading-order continuum Hamiltonian of the generalized chain.

    The potential is z^2/2 + gamma z^p / p; only the grade-one block
    gamma eps^{(p-2)/2} R^p / p - (h^2/24) S_xx^2 is kept beyond the
    background.  For p = 3 (4) the default gamma is alpha (beta).
    """
    p = model.p
    gamma = model.gamma
    if gamma is None:
        if p == 3:
            gamma = model.alpha
        elif p == 4:
            gamma = model.beta
        else:
            raise AlgebraError("generalized chain needs gamma for p >= 5")
    eps = model.eps
    h = model.h
    c_p = _as_expr(gamma) * _half_integer_power(eps, p - 2) / p
    r = local("p")
    sx = local("q_x")
    sxx = local("q_x", 1)
    half = Fraction(1, 2)
    background = density((half, [r, r]), (half, [sx, sx]))
    grade_one = density((c_p, [r] * p), (-(h * h) / 24, [sxx, sxx]))
    return GradedHamiltonian(
        {
            0: integrate(_riemann(background)),
            1: integrate(_riemann(grade_one)),
        }
    )


def water_waves() -> GradedHamiltonian:
    """Fixed graded Hamiltonian of the long-wave water-wave expansion.

    The wave profile sits in the coordinate slot and the velocity
    potential's derivative in the momentum slot; the two perturbation
    orders are hard-coded from the expanded Hamiltonian (the
    Dirichlet-to-Neumann expansion itself is out of scope).
    """
    qx = local("q_x")
    p = local("p")
    px = local("p", 1)
    pxx = local("p", 2)
    half = Fraction(1, 2)
    slots = density(
        (half, [qx, qx]),
        (half, [p, p]),
        (Fraction(-1, 6), [px, px]),
        (_INV_SQRT2, [qx, p, p]),
        (Fraction(1, 15), [pxx, pxx]),
        (-_INV_SQRT2, [qx, px, px]),
    )
    return GradedHamiltonian.from_density(_riemann(slots), scale=2)


# -- model files ---------------------------------------------------------

_GENERIC_KEYS = frozenset(
    ["a", "b", "c", "d1", "sigma"]
    + [f"e{i}" for i in range(1, 8)]
    + [f"f{i}" for i in range(1, 4)]
    + [f"g{i}" for i in range(1, 15)]
)
_MECHANICAL_KEYS = frozenset(["alpha1", "alpha2", "beta1", "beta2", "beta3"])
_FPU_KEYS = frozenset(["alpha", "beta", "eps", "h", "p", "gamma"])

Model = GenericModel | MechanicalModel | FPUContinuumModel | WaterWaveModel


def _read_toml(path: Path) -> dict:
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _parameter(section: str, key: str, value: object) -> CoefficientExpr:
    if isinstance(value, bool):
        raise ParseError(f"[{section}] {key}: booleans are not coefficients")
    if isinstance(value, int):
        return _as_expr(value)
    if isinstance(value, float):
        return _as_expr(Fraction(str(value)))
    if isinstance(value, str):
        try:
            return parse_coefficient(value)
        except ParseError as exc:
            raise ParseError(f"[{section}] {key}: {exc}") from exc
    raise ParseError(f"[{section}] {key}: unsupported value {value!r}")


def load_model(path: str | Path) -> Model:
    """Read a model description from a TOML file.

    The file must contain exactly one of the sections ``[generic]``,
    ``[mechanical]``, ``[fpu]``, ``[waterwaves]``; entries are numbers or
    coefficient expressions in strings (for example ``d1 = "d1"`` or
    ``alpha = "1/4"``).
    """
    path = Path(path)
    data = _read_toml(path)
    if len(data) != 1:
        raise ParseError(f"{path}: expected exactly one model section")
    section, table = next(iter(data.items()))
    if not isinstance(table, dict):
        raise ParseError(f"{path}: [{section}] is not a table")
    if section == "generic":
        return _load_generic(table)
    if section == "mechanical":
        return _load_keys(MechanicalModel, "mechanical", table, _MECHANICAL_KEYS)
    if section == "fpu":
        return _load_fpu(table)
    if section == "waterwaves":
        if table:
            raise ParseError("[waterwaves] takes no parameters")
        return WaterWaveModel()
    raise ParseError(f"{path}: unknown model section [{section}]")


def _load_generic(table: dict) -> GenericModel:
    kwargs: dict[str, object] = {}
    for key, value in table.items():
        if key not in _GENERIC_KEYS:
            raise ParseError(f"unknown parameter {key!r} in [generic]")
        if key == "sigma":
            if value not in (1, -1):
                raise ParseError("[generic] sigma must be 1 or -1")
            kwargs[key] = value
        else:
            kwargs[key] = _parameter("generic", key, value)
    return GenericModel(**kwargs)


def _load_keys(cls, section: str, table: dict, keys: frozenset[str]):
    kwargs = {}
    for key, value in table.items():
        if key not in keys:
            raise ParseError(f"unknown parameter {key!r} in [{section}]")
        kwargs[key] = _parameter(section, key, value)
    return cls(**kwargs)


def _load_fpu(table: dict) -> FPUContinuumModel:
    kwargs: dict[str, object] = {}
    for key, value in table.items():
        if key not in _FPU_KEYS:
            raise ParseError(f"unknown parameter {key!r} in [fpu]")
        if key == "p":
            if not isinstance(value, int) or value < 3:
                raise ParseError("[fpu] p must be an integer >= 3")
            kwargs[key] = value
        else:
            kwargs[key] = _parameter("fpu", key, value)
    return FPUContinuumModel(**kwargs)
