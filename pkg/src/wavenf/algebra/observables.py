"""Integrated observables and canonicalization modulo total derivatives.

An observable is a polynomial in circle integrals of density monomials
(atoms).  :func:`integrate` maps a density to its canonical observable:
each monomial is rewritten by integration by parts into a unique
representative, exact antiderivatives are resolved with their mean split
off as a separate atom factor, and vanishing integrals (single derivatives,
zero-mean fields, antiderivatives) are dropped.

The canonical representative of an integration-by-parts class is the
monomial minimizing ``Monomial.order_key()``: derivative orders as spread
out as possible, ties broken toward factors sorted low.  For example
``O[u*u_xx]`` rewrites to ``-O[u_x^2]`` and ``O[u^2*u_xx]`` to
``-2*O[u*u_x^2]``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator

from wavenf.algebra.coefficients import CoefficientExpr, Scalar, _as_expr
from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    Factor,
    LocalFactor,
    Monomial,
    factor_order,
)
from wavenf.errors import AlgebraError

#: An atom is the factor tuple of a canonical monomial under the integral.
Atom = tuple[Factor, ...]

_MAX_REWRITES = 100_000


def _atom_key(atom: Atom) -> tuple:
    return tuple(f.sort_key() for f in atom)


def _sort_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(sorted(atoms, key=_atom_key))


class ObservableExpr:
    """Polynomial in integral atoms with exact coefficients.

    Terms are products of atoms (``O[u^2]*O[v^2]`` is a two-atom term)
    with :class:`CoefficientExpr` coefficients.  The empty product is a
    plain scalar term.  Instances are immutable; equality subtracts and
    tests for zero, which is exact because atoms are canonical.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[tuple[Atom, ...], CoefficientExpr] | None = None) -> None:
        cleaned = {
            atoms: coeff
            for atoms, coeff in (terms or {}).items()
            if not coeff.is_zero
        }
        object.__setattr__(self, "_terms", cleaned)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ObservableExpr is immutable")

    def __reduce__(self):
        return (ObservableExpr, (self._terms,))

    @classmethod
    def zero(cls) -> ObservableExpr:
        return cls({})

    @classmethod
    def scalar(cls, value: Scalar) -> ObservableExpr:
        return cls({(): _as_expr(value)})

    @classmethod
    def from_atom(cls, atom: Atom, coeff: Scalar = 1) -> ObservableExpr:
        ordered = tuple(sorted(atom, key=lambda f: f.sort_key()))
        return cls({(ordered,): _as_expr(coeff)})

    def items(self) -> list[tuple[tuple[Atom, ...], CoefficientExpr]]:
        """Terms in deterministic order."""
        return sorted(self._terms.items(), key=lambda kv: tuple(map(_atom_key, kv[0])))

    def __iter__(self) -> Iterator[tuple[tuple[Atom, ...], CoefficientExpr]]:
        return iter(self.items())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: ObservableExpr) -> ObservableExpr:
        terms = dict(self._terms)
        for atoms, coeff in other._terms.items():
            if atoms in terms:
                terms[atoms] = terms[atoms] + coeff
            else:
                terms[atoms] = coeff
        return ObservableExpr(terms)

    def __sub__(self, other: ObservableExpr) -> ObservableExpr:
        return self + (-other)

    def __neg__(self) -> ObservableExpr:
        return ObservableExpr({a: -c for a, c in self._terms.items()})

    def scaled(self, c: Scalar) -> ObservableExpr:
        factor = _as_expr(c)
        return ObservableExpr({a: coeff * factor for a, coeff in self._terms.items()})

    def __mul__(self, other: ObservableExpr) -> ObservableExpr:
        out: dict[tuple[Atom, ...], CoefficientExpr] = {}
        for a1, c1 in self._terms.items():
            for a2, c2 in other._terms.items():
                key = _sort_atoms(a1 + a2)
                c = c1 * c2
                if key in out:
                    out[key] = out[key] + c
                else:
                    out[key] = c
        return ObservableExpr(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservableExpr):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore[assignment]

    def coefficient_of(self, *atom_factor_lists: Iterable[Factor]) -> CoefficientExpr:
        """Coefficient of a product of atoms, given by their factor lists."""
        atoms = _sort_atoms(
            tuple(sorted(fs, key=lambda f: f.sort_key())) for fs in atom_factor_lists
        )
        return self._terms.get(atoms, _as_expr(0))

    def map_coefficients(self, fn: Callable[[CoefficientExpr], CoefficientExpr]) -> ObservableExpr:
        return ObservableExpr({a: fn(c) for a, c in self._terms.items()})

    def single_atom_part(self) -> ObservableExpr:
        """Terms that are a single atom (no products, no scalars)."""
        return ObservableExpr(
            {a: c for a, c in self._terms.items() if len(a) == 1}
        )

    def product_part(self) -> ObservableExpr:
        """Terms with two or more atom factors (mean-field products)."""
        return ObservableExpr(
            {a: c for a, c in self._terms.items() if len(a) >= 2}
        )

    def max_atom_degree(self) -> int:
        return max((len(a) for a in self._terms), default=0)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for atoms in self._terms:
            for atom in atoms:
                for f in atom:
                    out.add(f.var)
        return out

    # -- rendering -------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for atoms, coeff in self.items():
            body = "*".join(_format_atom(a) for a in atoms)
            coeff_text = str(coeff)
            if not body:
                parts.append(coeff_text)
            elif coeff_text == "1":
                parts.append(body)
            elif coeff_text == "-1":
                parts.append(f"-{body}")
            else:
                if " " in coeff_text:
                    coeff_text = f"({coeff_text})"
                parts.append(f"{coeff_text}*{body}")
        text = parts[0]
        for part in parts[1:]:
            if part.startswith("-"):
                text += f" - {part[1:]}"
            else:
                text += f" + {part}"
        return text

    def __repr__(self) -> str:
        return f"ObservableExpr({self})"

    def to_json(self) -> dict:
        """JSON-ready form: a list of terms with stringified coefficients."""
        terms = []
        for atoms, coeff in self.items():
            terms.append(
                {
                    "coeff": str(coeff),
                    "atoms": [[_factor_json(f) for f in atom] for atom in atoms],
                }
            )
        return {"format": 1, "terms": terms}


def _format_atom(atom: Atom) -> str:
    return f"O[{Monomial(1, atom)}]" if atom else "O[1]"


def _factor_json(f: Factor) -> dict:
    if isinstance(f, LocalFactor):
        return {"var": f.var, "order": f.order}
    return {"antideriv": [{"var": g.var, "order": g.order} for g in f.inner]}


# -- canonicalization ----------------------------------------------------

def _antideriv_rewrite(factor: AntiDerivFactor) -> list[tuple[Atom | None, CoefficientExpr, tuple[Factor, ...]]] | None:
    """Resolve an exact antiderivative factor, or return None.

    Result entries are ``(mean_atom, coefficient, replacement_factors)``;
    a non-None ``mean_atom`` multiplies the term by that atom's integral.
    """
    inner = factor.inner
    if len(inner) == 1:
        f = inner[0]
        if f.order >= 1:
            # T(d/dx g) = g - <g>; the mean vanishes for zero-mean fields
            # and for derivatives alike.
            return [(None, _as_expr(1), (LocalFactor(f.var, f.order - 1),))]
        return None
    orders = sorted({f.order for f in inner})
    if len(orders) == 2 and orders[1] == orders[0] + 1:
        low = [f for f in inner if f.order == orders[0]]
        high = [f for f in inner if f.order == orders[1]]
        if len(high) == 1:
            # T(g^a g') with g the low factor: g^{a+1}/(a+1) minus its mean.
            k = len(low) + 1
            base = low[0]
            coeff = _as_expr(1) / k
            power = (base,) * k
            return [
                (None, coeff, power),
                (tuple(power), -coeff, ()),
            ]
    return None


def _integrate_monomial(coeff: CoefficientExpr, factors: tuple[Factor, ...]) -> ObservableExpr:
    """Canonical observable for one integrand monomial."""
    result = ObservableExpr.zero()
    # Work items: (coefficient, atom multipliers, remaining integrand factors).
    work: list[tuple[CoefficientExpr, tuple[Atom, ...], tuple[Factor, ...]]] = [
        (coeff, (), tuple(sorted(factors, key=lambda f: f.sort_key())))
    ]
    steps = 0
    while work:
        steps += 1
        if steps > _MAX_REWRITES:
            raise AlgebraError("canonicalization did not terminate")
        c, atoms, fs = work.pop()
        if c.is_zero:
            continue

        # Resolve exact antiderivatives anywhere in the product.
        rewritten = False
        for i, f in enumerate(fs):
            if not isinstance(f, AntiDerivFactor):
                continue
            pieces = _antideriv_rewrite(f)
            if pieces is None:
                continue
            rest = fs[:i] + fs[i + 1 :]
            for mean_atom, mult, replacement in pieces:
                new_atoms = atoms + ((mean_atom,) if mean_atom else ())
                work.append((c * mult, new_atoms, rest + replacement))
            rewritten = True
            break
        if rewritten:
            continue

        # Whole-integral kills.
        if not fs:
            result = result + _assemble(c, atoms, None)
            continue
        if len(fs) == 1:
            # A single zero-mean field, plain derivative, or antiderivative
            # integrates to zero.
            continue
        if any(
            isinstance(f, AntiDerivFactor)
            and sorted(fs[:i] + fs[i + 1 :], key=lambda g: g.sort_key())
            == sorted(f.inner, key=lambda g: g.sort_key())
            for i, f in enumerate(fs)
        ):
            # O[T(P) * P] = 0 since T(P)*P is half an exact derivative.
            continue

        # Integration by parts on a maximal-order factor.
        move = _ibp_candidate(fs)
        if move is None:
            result = result + _assemble(c, atoms, fs)
            continue
        for mult, extra_atom, new_fs in move:
            new_atoms = atoms + ((extra_atom,) if extra_atom else ())
            work.append((c * mult, new_atoms, new_fs))
    return result


def _ibp_candidate(
    fs: tuple[Factor, ...],
) -> list[tuple[CoefficientExpr, Atom | None, tuple[Factor, ...]]] | None:
    """One accepted integration-by-parts move, or None if ``fs`` is canonical."""
    k_max = max(factor_order(f) for f in fs)
    if k_max < 1:
        return None
    index = next(i for i, f in enumerate(fs) if factor_order(f) == k_max)
    top = fs[index]
    assert isinstance(top, LocalFactor)
    lowered = LocalFactor(top.var, top.order - 1)
    rest = fs[:index] + fs[index + 1 :]

    original = Monomial(1, fs)
    produced: list[tuple[CoefficientExpr, Atom | None, Monomial]] = []
    self_coeff = _as_expr(0)
    # O[top * rest] = -O[lowered * d/dx(rest)], expanded by the product rule.
    for i in range(len(rest)):
        g = rest[i]
        others = rest[:i] + rest[i + 1 :] + (lowered,)
        if isinstance(g, LocalFactor):
            term = Monomial(-1, others + (g.diff(),))
            if term.factors == original.factors:
                self_coeff = self_coeff + term.coeff
            else:
                produced.append((term.coeff, None, Monomial(1, term.factors)))
        else:
            term = Monomial(-1, others + g.inner)
            if term.factors == original.factors:
                self_coeff = self_coeff + term.coeff
            else:
                produced.append((term.coeff, None, Monomial(1, term.factors)))
            produced.append((_as_expr(1), tuple(g.inner), Monomial(1, others)))

    scale = _as_expr(1) - self_coeff
    if scale.is_zero:
        return None
    out: list[tuple[CoefficientExpr, Atom | None, tuple[Factor, ...]]] = []
    key = original.order_key()
    for mult, atom, mono in produced:
        if mono.order_key() >= key:
            return None
        out.append((mult / scale, atom, mono.factors))
    return out


def _assemble(c: CoefficientExpr, atoms: tuple[Atom, ...], fs: tuple[Factor, ...] | None) -> ObservableExpr:
    """Combine accumulated mean atoms (recursively canonicalized) with a
    finished integrand."""
    out = ObservableExpr.scalar(c)
    for atom in atoms:
        out = out * _integrate_monomial(_as_expr(1), atom)
    if fs is not None:
        out = out * ObservableExpr.from_atom(tuple(sorted(fs, key=lambda f: f.sort_key())))
    return out


def integrate(p: DensityPolynomial) -> ObservableExpr:
    """Circle integral of a density, canonicalized modulo total derivatives."""
    out = ObservableExpr.zero()
    for m in p.terms:
        out = out + _integrate_monomial(m.coeff, m.factors)
    return out


def normalize(obs: ObservableExpr) -> ObservableExpr:
    """Re-canonicalize every atom of an observable (idempotent)."""
    out = ObservableExpr.zero()
    for atoms, coeff in obs.items():
        term = ObservableExpr.scalar(coeff)
        for atom in atoms:
            term = term * _integrate_monomial(_as_expr(1), atom)
        out = out + term
    return out


def observable(*spec: tuple[Scalar, Iterable[Factor]]) -> ObservableExpr:
    """Build a canonical observable from ``(coefficient, factors)`` atoms."""
    out = ObservableExpr.zero()
    for c, fs in spec:
        out = out + _integrate_monomial(_as_expr(c), tuple(fs))
    return out


# -- translation flow ----------------------------------------------------

_FLOW_SIGN = {"u": 1, "v": -1}


def lie_translation(obs: ObservableExpr) -> ObservableExpr:
    """Derivative along the flow translating u left and v right.

    This is the Lie derivative with respect to the quadratic background
    flow ``u_t = u_x``, ``v_t = -v_x``; on observables it acts by the
    product rule over atoms.
    """
    out = ObservableExpr.zero()
    for atoms, coeff in obs.items():
        for i, atom in enumerate(atoms):
            rest = atoms[:i] + atoms[i + 1 :]
            cofactor = ObservableExpr({rest: coeff})
            out = out + cofactor * _atom_flow_derivative(atom)
    return out


def _atom_flow_derivative(atom: Atom) -> ObservableExpr:
    out = ObservableExpr.zero()
    for i, f in enumerate(atom):
        rest = atom[:i] + atom[i + 1 :]
        if f.var not in _FLOW_SIGN:
            raise AlgebraError(
                f"translation flow is defined on u, v only, found {f.var!r}"
            )
        sign = _FLOW_SIGN[f.var]
        if isinstance(f, LocalFactor):
            out = out + _integrate_monomial(
                _as_expr(sign), rest + (LocalFactor(f.var, f.order + 1),)
            )
        else:
            out = out + _integrate_monomial(_as_expr(sign), rest + f.inner)
            out = out - _integrate_monomial(_as_expr(sign), f.inner) * _integrate_monomial(
                _as_expr(1), rest
            )
    return out
