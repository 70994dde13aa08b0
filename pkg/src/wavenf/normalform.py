"""Resonant normal forms over the left/right translation flow.

The quadratic background ``K0 = (1/2) O[u^2 + v^2]`` generates the flow
translating u left and v right.  Perturbation orders are averaged along
that flow: the order-j normal form term is the flow average of the
effective perturbation ``S_j``, and the generator ``G_j`` solves the
homological equation ``L_{K0} G_j = S_j - Z_j`` with zero flow average.

At order two the effective perturbation is

    S2 = H2 + (1/2){H1, G1} + (1/2){<H1>_0, G1},

and ``Z2 = <S2>_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from wavenf.algebra.coefficients import CoefficientExpr, Scalar, _as_expr
from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    Factor,
    LocalFactor,
    Monomial,
    grade_decomposition,
)
from wavenf.algebra.observables import (
    Atom,
    ObservableExpr,
    _integrate_monomial,
    integrate,
    lie_translation,
)
from wavenf.algebra.variational import PoissonStructure, poisson_bracket
from wavenf.errors import AlgebraError

_GARDNER = PoissonStructure.gardner()

LEFT_VARS = frozenset({"u"})
RIGHT_VARS = frozenset({"v"})


def split_left_right(factors: Atom) -> tuple[str, tuple[Factor, ...], tuple[Factor, ...]]:
    """Classify an atom's factors by travel direction.

    Returns ``(kind, u_part, v_part)`` with kind one of ``"left"``,
    ``"right"``, ``"mixed"``; antiderivative factors follow their inner
    variable.
    """
    u_part = tuple(f for f in factors if f.var in LEFT_VARS)
    v_part = tuple(f for f in factors if f.var in RIGHT_VARS)
    if len(u_part) + len(v_part) != len(factors):
        bad = {f.var for f in factors} - (LEFT_VARS | RIGHT_VARS)
        raise AlgebraError(f"left/right split undefined for variables {sorted(bad)}")
    if u_part and v_part:
        kind = "mixed"
    elif u_part:
        kind = "left"
    else:
        kind = "right"
    return kind, u_part, v_part


def _averaged_atom(atom: Atom) -> ObservableExpr:
    """Flow average of one atom: unchanged if pure, else the product of the
    integrals of its two sides."""
    kind, u_part, v_part = split_left_right(atom)
    if kind != "mixed":
        return ObservableExpr.from_atom(atom)
    left = _integrate_monomial(_as_expr(1), u_part)
    right = _integrate_monomial(_as_expr(1), v_part)
    return left * right


def average0(obs: ObservableExpr) -> ObservableExpr:
    """Average an observable along the background translation flow.

    Invariant atoms (single-direction integrals) pass through; a mixed atom
    factorizes into the product of its side integrals.  A term with two or
    more mixed atom factors has no closed-form average here and raises.
    """
    out = ObservableExpr.zero()
    for atoms, coeff in obs.items():
        mixed = [a for a in atoms if split_left_right(a)[0] == "mixed"]
        if len(mixed) > 1:
            raise AlgebraError(
                "flow average of a product of two oscillating integrals"
            )
        term = ObservableExpr.scalar(coeff)
        for atom in atoms:
            term = term * _averaged_atom(atom)
        out = out + term
    return out


def _generator_for_atom(atom: Atom) -> ObservableExpr:
    """Generator contribution of one mixed atom with zero flow average.

    For a mixed integrand ``f(u side) g(v side)`` the homological equation
    is solved by ``(1/2) O[g T(f)]``, equal to ``-(1/2) O[f T(g)]`` by the
    exact skew-adjointness of the antiderivative.  Whichever side is local
    hosts the antiderivative; if neither is, the generator leaves the
    depth-one algebra and this raises.
    """
    _, u_part, v_part = split_left_right(atom)
    u_local = not any(isinstance(f, AntiDerivFactor) for f in u_part)
    v_local = not any(isinstance(f, AntiDerivFactor) for f in v_part)
    if u_local:
        anti = AntiDerivFactor(tuple(u_part))  # type: ignore[arg-type]
        return _integrate_monomial(_as_expr(Fraction(1, 2)), v_part + (anti,))
    if v_local:
        anti = AntiDerivFactor(tuple(v_part))  # type: ignore[arg-type]
        return _integrate_monomial(_as_expr(Fraction(-1, 2)), u_part + (anti,))
    raise AlgebraError(
        "generator needs an antiderivative of an already nonlocal product"
    )


def solve_homological(s: ObservableExpr) -> tuple[ObservableExpr, ObservableExpr]:
    """Split ``S`` into its flow average and a generator.

    Returns ``(Z, G)`` with ``Z = <S>_0`` and ``L_{K0} G = S - Z``,
    normalized by ``<G>_0 = 0``.
    """
    z = average0(s)
    g = ObservableExpr.zero()
    for atoms, coeff in s.items():
        mixed_indices = [
            i for i, a in enumerate(atoms) if split_left_right(a)[0] == "mixed"
        ]
        if not mixed_indices:
            continue
        if len(mixed_indices) > 1:
            raise AlgebraError(
                "homological solve with two oscillating integrals in one term"
            )
        i = mixed_indices[0]
        cofactor = ObservableExpr({atoms[:i] + atoms[i + 1 :]: coeff})
        g = g + cofactor * _generator_for_atom(atoms[i])
    return z, g


@dataclass(frozen=True)
class GradedHamiltonian:
    """A Hamiltonian split by scaling grade: ``K0 + sum_g lambda^g H_g``."""

    orders: dict[int, ObservableExpr]

    @classmethod
    def from_density(cls, dens: DensityPolynomial, scale: int = 1) -> GradedHamiltonian:
        """Grade-split a local density and integrate each part.

        ``scale`` divides every grade, for relabeled scalings: an even
        perturbation with grades 2 and 4 becomes orders 1 and 2 under
        ``scale=2``.
        """
        orders: dict[int, ObservableExpr] = {}
        for g, part in grade_decomposition(dens).items():
            obs = integrate(part)
            if obs.is_zero:
                continue
            if g % scale:
                raise AlgebraError(
                    f"grade {g} is not a multiple of the relabel scale {scale}"
                )
            key = g // scale
            orders[key] = orders.get(key, ObservableExpr.zero()) + obs
        return cls(orders)

    def order(self, g: int) -> ObservableExpr:
        return self.orders.get(g, ObservableExpr.zero())

    def max_order(self) -> int:
        return max(self.orders, default=0)


def background_k0() -> ObservableExpr:
    """The normalized quadratic background ``(1/2) O[u^2] + (1/2) O[v^2]``."""
    u = LocalFactor("u", 0)
    v = LocalFactor("v", 0)
    half = _as_expr(Fraction(1, 2))
    return ObservableExpr.from_atom((u, u), half) + ObservableExpr.from_atom((v, v), half)


@dataclass
class NormalFormResult:
    """Normal form data through second order.

    ``z[j]`` is the order-j normal form term, ``generators[j]`` the
    canonical-transformation generator, ``residuals[j]`` the (identically
    zero) defect of the homological equation at that order, and ``s2`` the
    effective order-two perturbation that was averaged.
    """

    z: dict[int, ObservableExpr]
    generators: dict[int, ObservableExpr]
    residuals: dict[int, ObservableExpr]
    s2: ObservableExpr = field(default_factory=ObservableExpr.zero)

    def normal_form(self) -> dict[int, ObservableExpr]:
        out = {0: background_k0()}
        out.update(self.z)
        return out


def normal_form_order2(h: GradedHamiltonian) -> NormalFormResult:
    """Compute Z1, G1, Z2, G2 for a graded Hamiltonian over K0.

    The grade-zero part must be the normalized background (its flow is the
    unit-speed translation pair).  Missing grades count as zero.
    """
    if not h.order(0) == background_k0():
        raise AlgebraError(
            "grade-zero part is not the normalized quadratic background"
        )
    h1 = h.order(1)
    h2 = h.order(2)
    z1, g1 = solve_homological(h1)
    r1 = lie_translation(g1) - (h1 - z1)

    s2 = (
        h2
        + poisson_bracket(h1, g1, _GARDNER).scaled(Fraction(1, 2))
        + poisson_bracket(z1, g1, _GARDNER).scaled(Fraction(1, 2))
    )
    z2, g2 = solve_homological(s2)
    r2 = lie_translation(g2) - (s2 - z2)
    return NormalFormResult(
        z={1: z1, 2: z2},
        generators={1: g1, 2: g2},
        residuals={1: r1, 2: r2},
        s2=s2,
    )


def normal_form_mechanical(
    h2: ObservableExpr, h4: ObservableExpr
) -> NormalFormResult:
    """Normal form for even perturbations ``K0 + lambda^2 H2 + lambda^4 H4``.

    Odd grades vanish, so the computation relabels ``H2, H4`` to orders one
    and two; results are keyed by the original grades 2 and 4.
    """
    relabeled = GradedHamiltonian({0: background_k0(), 1: h2, 2: h4})
    result = normal_form_order2(relabeled)
    return NormalFormResult(
        z={2: result.z[1], 4: result.z[2]},
        generators={2: result.generators[1], 4: result.generators[2]},
        residuals={2: result.residuals[1], 4: result.residuals[2]},
        s2=result.s2,
    )


def generalized_fpu_Z1(
    p: int,
    gamma: Scalar | CoefficientExpr | None = None,
    eps: Scalar | CoefficientExpr | None = None,
    h: Scalar | CoefficientExpr | None = None,
) -> ObservableExpr:
    """Closed-form leading normal form of the generalized chain.

    For the interparticle potential ``z^2/2 + gamma z^p / p`` the grade-one
    perturbation averages to

        Z1 = c_p [O[u^p] + (-1)^p O[v^p]
              + sum_{j=2}^{p-2} (-1)^j C(p,j) O[u^{p-j}] O[v^j]]
             - (h^2/48) (O[u_x^2] + O[v_x^2]),

    with ``c_p = gamma eps^{(p-2)/2} / (2^{p/2} p)``.  Defaults are the
    symbols ``gamma``, ``eps``, ``h``.
    """
    if p < 3:
        raise AlgebraError("nonlinearity degree must be at least 3")
    gamma_c = _as_expr(gamma) if gamma is not None else CoefficientExpr.symbol("gamma")
    eps_c = _as_expr(eps) if eps is not None else CoefficientExpr.symbol("eps")
    h_c = _as_expr(h) if h is not None else CoefficientExpr.symbol("h")

    half_powers = p - 2
    eps_pow = eps_c ** (half_powers // 2)
    if half_powers % 2:
        eps_pow = eps_pow * CoefficientExpr.sqrt(eps_c)
    two_pow = _as_expr(2 ** (p // 2))
    if p % 2:
        two_pow = two_pow * CoefficientExpr.sqrt(2)
    c_p = gamma_c * eps_pow / (two_pow * p)

    u = LocalFactor("u", 0)
    v = LocalFactor("v", 0)
    ux = LocalFactor("u", 1)
    vx = LocalFactor("v", 1)
    out = ObservableExpr.from_atom((u,) * p, c_p)
    out = out + ObservableExpr.from_atom((v,) * p, c_p * (-1) ** p)
    for j in range(2, p - 1):
        weight = c_p * (-1) ** j * math.comb(p, j)
        out = out + ObservableExpr.from_atom((u,) * (p - j)) * ObservableExpr.from_atom(
            (v,) * j
        ).scaled(weight)
    disp = -(h_c**2) / 48
    out = out + ObservableExpr.from_atom((ux, ux), disp)
    out = out + ObservableExpr.from_atom((vx, vx), disp)
    return out
