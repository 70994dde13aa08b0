"""Local densities: products of field derivatives with exact coefficients.

A :class:`LocalFactor` is one derivative of a field variable (``u_x``,
``p``, ``q_xx``); an :class:`AntiDerivFactor` is the zero-mean
antiderivative of a product of local factors in a single variable.  A
:class:`Monomial` multiplies factors by a coefficient, and a
:class:`DensityPolynomial` is a finite sum of monomials.  Densities are
pointwise objects; integration over the circle and canonicalization modulo
total derivatives live in :mod:`wavenf.algebra.observables`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from wavenf.algebra.coefficients import CoefficientExpr, Scalar, _as_expr
from wavenf.errors import AlgebraError, MixedNonlocalError

#: Recognized field variables.  ``q_x`` denotes the derivative of the
#: coordinate field, so its factor order counts derivatives beyond the first.
VARIABLES = ("u", "v", "q_x", "p", "r", "w")

_VAR_RANK = {name: i for i, name in enumerate(VARIABLES)}


def _derivative_suffix(total: int) -> str:
    if total == 0:
        return ""
    if total <= 3:
        return "_" + "x" * total
    return f"_{total}x"


@dataclass(frozen=True)
class LocalFactor:
    """``order``-th spatial derivative of field ``var``."""

    var: str
    order: int

    def __post_init__(self) -> None:
        if self.var not in _VAR_RANK:
            raise AlgebraError(f"unknown variable {self.var!r}")
        if self.order < 0:
            raise AlgebraError("negative derivative order")

    def diff(self) -> LocalFactor:
        return LocalFactor(self.var, self.order + 1)

    def sort_key(self) -> tuple:
        return (0, _VAR_RANK[self.var], self.order)

    def __str__(self) -> str:
        if self.var == "q_x":
            return "q" + _derivative_suffix(self.order + 1)
        return self.var + _derivative_suffix(self.order)


@dataclass(frozen=True)
class AntiDerivFactor:
    """Zero-mean antiderivative of a single-variable product of factors.

    Represents ``T(f) = del_x^{-1} P_0 f`` where ``P_0`` removes the mean:
    the inner product is integrated with the constant Fourier mode dropped,
    and the output has zero mean.  Nesting is not allowed, and the inner
    product must involve exactly one field variable.
    """

    inner: tuple[LocalFactor, ...]

    def __post_init__(self) -> None:
        if not self.inner:
            raise AlgebraError("empty antiderivative")
        if not all(isinstance(f, LocalFactor) for f in self.inner):
            raise AlgebraError("antiderivatives cannot be nested")
        if len({f.var for f in self.inner}) != 1:
            raise MixedNonlocalError(
                "antiderivative over a product mixing field variables"
            )
        object.__setattr__(self, "inner", tuple(sorted(self.inner, key=LocalFactor.sort_key)))

    @property
    def var(self) -> str:
        return self.inner[0].var

    def sort_key(self) -> tuple:
        return (1, _VAR_RANK[self.var]) + tuple(f.sort_key() for f in self.inner)

    def __str__(self) -> str:
        body = "*".join(str(f) for f in self.inner)
        return f"Dinv[{body}]"


Factor = Union[LocalFactor, AntiDerivFactor]


def factor_order(factor: Factor) -> int:
    """Derivative order used by the canonical term order; antiderivatives
    count as order -1."""
    if isinstance(factor, LocalFactor):
        return factor.order
    return -1


class Monomial:
    """A coefficient times a product of factors (sorted canonically)."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: Scalar, factors: Iterable[Factor] = ()) -> None:
        object.__setattr__(self, "coeff", _as_expr(coeff))
        ordered = tuple(sorted(factors, key=lambda f: f.sort_key()))
        object.__setattr__(self, "factors", ordered)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Monomial is immutable")

    def __reduce__(self):
        return (Monomial, (self.coeff, self.factors))

    @property
    def degree(self) -> int:
        return len(self.factors)

    def variables(self) -> set[str]:
        out = set()
        for f in self.factors:
            if isinstance(f, LocalFactor):
                out.add(f.var)
            else:
                out.add(f.var)
        return out

    def scaled(self, c: Scalar) -> Monomial:
        return Monomial(self.coeff * c, self.factors)

    def without(self, index: int) -> tuple[Factor, Monomial]:
        """Split off the factor at ``index``."""
        factor = self.factors[index]
        rest = self.factors[:index] + self.factors[index + 1 :]
        return factor, Monomial(self.coeff, rest)

    def order_key(self) -> tuple:
        """Well-founded key for canonicalization: antiderivative count,
        then descending derivative orders, then the factor tuple itself.
        Putting the count first makes every antiderivative elimination a
        descent."""
        n_anti = sum(1 for f in self.factors if isinstance(f, AntiDerivFactor))
        orders = tuple(sorted((factor_order(f) for f in self.factors), reverse=True))
        return (n_anti, orders, tuple(f.sort_key() for f in self.factors))

    def grade(self) -> int:
        """Scaling grade: each factor weighs 2 plus its derivative order,
        minus 4 for the quadratic background."""
        total = 0
        for f in self.factors:
            if isinstance(f, AntiDerivFactor):
                raise AlgebraError("antiderivatives carry no scaling grade")
            total += 2 + f.order
        return total - 4

    def __str__(self) -> str:
        if not self.factors:
            return str(self.coeff)
        parts: list[str] = []
        i = 0
        while i < len(self.factors):
            j = i
            while j < len(self.factors) and self.factors[j] == self.factors[i]:
                j += 1
            body = str(self.factors[i])
            parts.append(body if j - i == 1 else f"{body}^{j - i}")
            i = j
        coeff_text = str(self.coeff)
        joined = "*".join(parts)
        if coeff_text == "1":
            return joined
        if coeff_text == "-1":
            return f"-{joined}"
        if " " in coeff_text:
            coeff_text = f"({coeff_text})"
        return f"{coeff_text}*{joined}"

    def __repr__(self) -> str:
        return f"Monomial({self})"


class DensityPolynomial:
    """A finite sum of monomials, merged over identical factor products."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Monomial] = ()) -> None:
        merged: dict[tuple[Factor, ...], CoefficientExpr] = {}
        for m in terms:
            if m.factors in merged:
                merged[m.factors] = merged[m.factors] + m.coeff
            else:
                merged[m.factors] = m.coeff
        kept = [
            Monomial(c, f) for f, c in merged.items() if not c.is_zero
        ]
        kept.sort(key=Monomial.order_key)
        object.__setattr__(self, "terms", tuple(kept))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("DensityPolynomial is immutable")

    def __reduce__(self):
        return (DensityPolynomial, (self.terms,))

    @classmethod
    def zero(cls) -> DensityPolynomial:
        return cls()

    @classmethod
    def monomial(cls, coeff: Scalar, factors: Iterable[Factor] = ()) -> DensityPolynomial:
        return cls([Monomial(coeff, factors)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: DensityPolynomial) -> DensityPolynomial:
        return DensityPolynomial(self.terms + other.terms)

    def __sub__(self, other: DensityPolynomial) -> DensityPolynomial:
        return self + (-other)

    def __neg__(self) -> DensityPolynomial:
        return DensityPolynomial(m.scaled(-1) for m in self.terms)

    def scaled(self, c: Scalar) -> DensityPolynomial:
        return DensityPolynomial(m.scaled(c) for m in self.terms)

    def __mul__(self, other: DensityPolynomial) -> DensityPolynomial:
        out = []
        for a in self.terms:
            for b in other.terms:
                out.append(Monomial(a.coeff * b.coeff, a.factors + b.factors))
        return DensityPolynomial(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityPolynomial):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore[assignment]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for m in self.terms:
            out |= m.variables()
        return out

    def map_coefficients(self, fn) -> DensityPolynomial:
        return DensityPolynomial(Monomial(fn(m.coeff), m.factors) for m in self.terms)

    def coefficient_of(self, factors: Iterable[Factor]) -> CoefficientExpr:
        key = tuple(sorted(factors, key=lambda f: f.sort_key()))
        for m in self.terms:
            if m.factors == key:
                return m.coeff
        return _as_expr(0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = [str(m) for m in self.terms]
        text = parts[0]
        for part in parts[1:]:
            if part.startswith("-"):
                text += f" - {part[1:]}"
            else:
                text += f" + {part}"
        return text

    def __repr__(self) -> str:
        return f"DensityPolynomial({self})"


def local(var: str, order: int = 0) -> LocalFactor:
    """Shorthand factor constructor."""
    return LocalFactor(var, order)


def density(*spec: tuple[Scalar, Sequence[Factor]]) -> DensityPolynomial:
    """Build a density from ``(coefficient, factors)`` pairs."""
    return DensityPolynomial(Monomial(c, f) for c, f in spec)


def differentiate_monomial(
    m: Monomial,
) -> list[tuple[tuple[LocalFactor, ...] | None, Monomial]]:
    """Total spatial derivative by the product rule.

    Returns ``(mean_inner, term)`` pairs.  For local factors ``mean_inner``
    is ``None`` and the terms sum to the derivative.  Differentiating an
    antiderivative gives the inner product minus its mean: the subtracted
    mean appears as a pair whose first element names the integrand of a
    circle average multiplying ``term``.
    """
    out: list[tuple[tuple[LocalFactor, ...] | None, Monomial]] = []
    for i, factor in enumerate(m.factors):
        _, rest = m.without(i)
        if isinstance(factor, LocalFactor):
            out.append((None, Monomial(rest.coeff, rest.factors + (factor.diff(),))))
        else:
            out.append((None, Monomial(rest.coeff, rest.factors + factor.inner)))
            out.append((factor.inner, rest.scaled(-1)))
    return out


def differentiate_local(p: DensityPolynomial) -> DensityPolynomial:
    """Total spatial derivative of a density without antiderivatives."""
    out: list[Monomial] = []
    for m in p.terms:
        for mean_inner, term in differentiate_monomial(m):
            if mean_inner is not None:
                raise AlgebraError(
                    "derivative of an antiderivative needs observable-level handling"
                )
            out.append(term)
    return DensityPolynomial(out)


def substitute_linear(
    p: DensityPolynomial,
    mapping: dict[str, Sequence[tuple[Scalar, str]]],
) -> DensityPolynomial:
    """Replace each field variable by a linear combination of variables.

    ``mapping`` sends a variable name to ``(coefficient, new_variable)``
    pairs; unmapped variables pass through.  Monomials are expanded by
    distributing over every factor.  Densities containing antiderivatives
    are only supported when the relevant replacement has a single target.
    """
    out: list[Monomial] = []
    for m in p.terms:
        expansion: list[tuple[CoefficientExpr, tuple[Factor, ...]]] = [
            (m.coeff, ())
        ]
        for factor in m.factors:
            if isinstance(factor, AntiDerivFactor):
                rule = mapping.get(factor.var)
                if rule is None:
                    expansion = [(c, fs + (factor,)) for c, fs in expansion]
                    continue
                if len(rule) != 1:
                    raise MixedNonlocalError(
                        "linear substitution would mix variables under an antiderivative"
                    )
                coeff, new_var = rule[0]
                scale = _as_expr(coeff) ** len(factor.inner)
                new_inner = tuple(LocalFactor(new_var, f.order) for f in factor.inner)
                expansion = [
                    (c * scale, fs + (AntiDerivFactor(new_inner),))
                    for c, fs in expansion
                ]
                continue
            rule = mapping.get(factor.var)
            if rule is None:
                expansion = [(c, fs + (factor,)) for c, fs in expansion]
                continue
            expansion = [
                (c * _as_expr(coeff), fs + (LocalFactor(new_var, factor.order),))
                for c, fs in expansion
                for coeff, new_var in rule
            ]
        out.extend(Monomial(c, fs) for c, fs in expansion)
    return DensityPolynomial(out)


def grade_decomposition(p: DensityPolynomial) -> dict[int, DensityPolynomial]:
    """Split a local density by scaling grade."""
    buckets: dict[int, list[Monomial]] = {}
    for m in p.terms:
        buckets.setdefault(m.grade(), []).append(m)
    return {g: DensityPolynomial(ms) for g, ms in sorted(buckets.items())}


def from_fraction(value: int | Fraction) -> CoefficientExpr:
    return _as_expr(Fraction(value))
