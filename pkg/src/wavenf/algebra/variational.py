"""Variational derivatives and Poisson brackets.

Gradients are computed by the Euler operator

    delta F / delta u = sum_j (-d/dx)^j  dF/d(u_jx),

extended to antiderivative factors through the exact adjoint
``T* = -T`` of the zero-mean antiderivative.  A gradient is generally a
sum of densities weighted by invariant integrals (means split off by
``d/dx T(f) = f - <f>``); the :class:`Gradient` container keeps the pairs.
Pure constants are dropped throughout: gradients are defined modulo
additive constants, which every symplectic operator here annihilates.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from wavenf.algebra.coefficients import CoefficientExpr, Scalar, _as_expr
from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    Factor,
    LocalFactor,
    Monomial,
    differentiate_monomial,
)
from wavenf.algebra.observables import (
    Atom,
    ObservableExpr,
    integrate,
    _integrate_monomial,
)
from wavenf.errors import AlgebraError, MixedNonlocalError


@dataclass(frozen=True)
class Gradient:
    """A variational derivative: densities weighted by invariant integrals."""

    parts: tuple[tuple[ObservableExpr, DensityPolynomial], ...]

    @property
    def is_zero(self) -> bool:
        return all(w.is_zero or d.is_zero for w, d in self.parts)

    def plain(self) -> DensityPolynomial:
        """The gradient as a bare density; raises if integral weights remain."""
        total = DensityPolynomial.zero()
        for weight, dens in self.parts:
            scalar = _scalar_of(weight)
            if scalar is None:
                raise AlgebraError(
                    "gradient carries integral-weighted terms; no bare density form"
                )
            total = total + dens.scaled(scalar)
        return total

    def scaled(self, c: Scalar) -> Gradient:
        factor = _as_expr(c)
        return Gradient(tuple((w.scaled(factor), d) for w, d in self.parts))


def _scalar_of(obs: ObservableExpr) -> CoefficientExpr | None:
    """The value of an observable with no atoms, else None."""
    coeff = _as_expr(0)
    for atoms, c in obs.items():
        if atoms:
            return None
        coeff = coeff + c
    return coeff


WeightedDensity = list[tuple[ObservableExpr, DensityPolynomial]]


def _merge_weighted(parts: Iterable[tuple[ObservableExpr, DensityPolynomial]]) -> WeightedDensity:
    out: WeightedDensity = []
    for weight, dens in parts:
        if weight.is_zero or dens.is_zero:
            continue
        out.append((weight, dens))
    return out


def differentiate_with_means(
    parts: WeightedDensity,
) -> WeightedDensity:
    """Total spatial derivative of a weighted density.

    Antiderivative factors differentiate to their integrand minus its mean;
    the subtracted means become additional invariant weights.
    """
    out: WeightedDensity = []
    for weight, dens in parts:
        for m in dens.terms:
            for mean_inner, term in differentiate_monomial(m):
                if mean_inner is None:
                    out.append((weight, DensityPolynomial([term])))
                else:
                    mean = _integrate_monomial(_as_expr(1), mean_inner)
                    out.append((weight * mean, DensityPolynomial([term])))
    return _merge_weighted(out)


def _drop_constants(dens: DensityPolynomial) -> DensityPolynomial:
    return DensityPolynomial(m for m in dens.terms if m.factors)


def _atom_gradient(atom: Atom, var: str) -> WeightedDensity:
    """Euler operator applied to the integral of one atom."""
    parts: WeightedDensity = []
    counted = Counter(atom)
    for factor, mult in counted.items():
        index = atom.index(factor)
        rest = atom[:index] + atom[index + 1 :]
        if isinstance(factor, LocalFactor):
            if factor.var != var:
                continue
            base: WeightedDensity = [
                (ObservableExpr.scalar(1), DensityPolynomial.monomial(mult, rest))
            ]
            for _ in range(factor.order):
                base = differentiate_with_means(base)
            sign = -1 if factor.order % 2 else 1
            parts.extend((w.scaled(sign), d) for w, d in base)
        else:
            if factor.var != var:
                continue
            if any(isinstance(f, AntiDerivFactor) for f in rest):
                raise AlgebraError(
                    "variation would nest antiderivatives beyond depth one"
                )
            rest_locals = tuple(rest)
            if not rest_locals:
                raise AlgebraError("dangling antiderivative in a canonical atom")
            rest_vars = {f.var for f in rest_locals}
            if len(rest_vars) != 1:
                raise MixedNonlocalError(
                    "variation requires an antiderivative of a mixed product"
                )
            cofactor = AntiDerivFactor(rest_locals)  # type: ignore[arg-type]
            inner_counted = Counter(factor.inner)
            for g, gmult in inner_counted.items():
                g_index = factor.inner.index(g)
                inner_rest = factor.inner[:g_index] + factor.inner[g_index + 1 :]
                coeff = mult * gmult * (1 if g.order % 2 else -1)
                base = [
                    (
                        ObservableExpr.scalar(1),
                        DensityPolynomial.monomial(coeff, inner_rest + (cofactor,)),
                    )
                ]
                for _ in range(g.order):
                    base = differentiate_with_means(base)
                parts.extend(base)
    cleaned = [(w, _drop_constants(d)) for w, d in parts]
    return _merge_weighted(cleaned)


def variational_derivative(
    target: DensityPolynomial | ObservableExpr, var: str
) -> Gradient:
    """Variational derivative of an integral with respect to field ``var``.

    A density argument stands for its circle integral.  Observables may
    include products of integrals; the product rule turns cofactors into
    invariant weights.
    """
    obs = integrate(target) if isinstance(target, DensityPolynomial) else target
    parts: WeightedDensity = []
    for atoms, coeff in obs.items():
        for i, atom in enumerate(atoms):
            rest_atoms = atoms[:i] + atoms[i + 1 :]
            cofactor = ObservableExpr({rest_atoms: coeff})
            for weight, dens in _atom_gradient(atom, var):
                parts.append((cofactor * weight, dens))
    return Gradient(tuple(_merge_weighted(parts)))


@dataclass(frozen=True)
class PoissonStructure:
    """A constant-coefficient differential operator matrix.

    ``entries[i][j]`` is ``(coefficient, derivative_order)`` or None for a
    zero entry; the operator acts as ``coefficient * d^order/dx^order``.
    """

    variables: tuple[str, ...]
    entries: tuple[tuple[tuple[CoefficientExpr, int] | None, ...], ...]

    @classmethod
    def gardner(cls) -> PoissonStructure:
        """Decoupled structure diag(d/dx, -d/dx) on (u, v)."""
        one = _as_expr(1)
        return cls(
            ("u", "v"),
            (((one, 1), None), (None, (-one, 1))),
        )

    @classmethod
    def standard_rp(cls) -> PoissonStructure:
        """Off-diagonal structure [[0, d/dx], [d/dx, 0]] on (q_x, p)."""
        one = _as_expr(1)
        return cls(
            ("q_x", "p"),
            ((None, (one, 1)), ((one, 1), None)),
        )

    @classmethod
    def single(cls, var: str = "w") -> PoissonStructure:
        """One-component structure d/dx, as for the KdV hierarchy."""
        return cls((var,), (((_as_expr(1), 1),),))

    def is_skew_adjoint(self) -> bool:
        """Formal skew-adjointness: J_ij = -(-1)^{m_ji} J_ji with equal orders."""
        n = len(self.variables)
        for i in range(n):
            for j in range(n):
                a = self.entries[i][j]
                b = self.entries[j][i]
                if (a is None) != (b is None):
                    return False
                if a is None or b is None:
                    continue
                coeff_a, order_a = a
                coeff_b, order_b = b
                if order_a != order_b:
                    return False
                expected = -coeff_b if order_b % 2 == 0 else coeff_b
                if not coeff_a == expected:
                    return False
        return True

    def apply(self, column: Sequence[WeightedDensity]) -> list[WeightedDensity]:
        """Apply the operator matrix to a column of weighted densities."""
        out: list[WeightedDensity] = []
        for i in range(len(self.variables)):
            acc: WeightedDensity = []
            for j in range(len(self.variables)):
                entry = self.entries[i][j]
                if entry is None:
                    continue
                coeff, order = entry
                parts = [(w, d) for w, d in column[j]]
                for _ in range(order):
                    parts = differentiate_with_means(parts)
                acc.extend((w.scaled(coeff), d) for w, d in parts)
            out.append(_merge_weighted(acc))
        return out


def _integrate_weighted_product(a: WeightedDensity, b: WeightedDensity) -> ObservableExpr:
    total = ObservableExpr.zero()
    for wa, da in a:
        for wb, db in b:
            total = total + (wa * wb) * integrate(da * db)
    return total


def poisson_bracket(
    f: DensityPolynomial | ObservableExpr,
    g: DensityPolynomial | ObservableExpr,
    structure: PoissonStructure,
) -> ObservableExpr:
    """Poisson bracket {F, G} = integral of grad F . J grad G."""
    fobs = integrate(f) if isinstance(f, DensityPolynomial) else f
    gobs = integrate(g) if isinstance(g, DensityPolynomial) else g
    grad_f = [variational_derivative(fobs, var).parts for var in structure.variables]
    grad_g = [variational_derivative(gobs, var).parts for var in structure.variables]
    applied = structure.apply([list(parts) for parts in grad_g])
    total = ObservableExpr.zero()
    for i in range(len(structure.variables)):
        total = total + _integrate_weighted_product(list(grad_f[i]), applied[i])
    return total


def vector_field(
    hamiltonian: DensityPolynomial | ObservableExpr,
    structure: PoissonStructure,
) -> dict[str, DensityPolynomial]:
    """Hamiltonian vector field: time derivative of each field variable.

    Requires a Hamiltonian whose gradient is a bare density (no invariant
    integral weights) so the result is a pointwise density per variable.
    """
    obs = (
        integrate(hamiltonian)
        if isinstance(hamiltonian, DensityPolynomial)
        else hamiltonian
    )
    column = [variational_derivative(obs, var).parts for var in structure.variables]
    applied = structure.apply([list(parts) for parts in column])
    out: dict[str, DensityPolynomial] = {}
    for var, parts in zip(structure.variables, applied):
        total = DensityPolynomial.zero()
        for weight, dens in parts:
            scalar = _scalar_of(weight)
            if scalar is None:
                raise AlgebraError(
                    "vector field with integral-weighted terms; strip mean-field "
                    "products before building a flow"
                )
            total = total + dens.scaled(scalar)
        out[var] = total
    return out
