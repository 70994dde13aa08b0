"""Exact scalar coefficients: rational functions of named parameters.

Coefficients arising in the normal-form computations are quotients of
polynomials over Q in a finite set of parameter symbols.  Square roots of
parameters (and of small integers) are handled through dedicated symbols
carrying a reduction rule for their square, so that products stay exact:
``sqrt_eps * sqrt_eps`` reduces to ``eps`` and ``s2 * s2`` to ``2``.

Equality is decided by cross-multiplication, which is exact for rational
functions without requiring polynomial gcd computations.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Mapping, Union

from wavenf.errors import AlgebraError, ParseError

# A polynomial is a mapping from monomial keys to rational coefficients.
# A monomial key is a tuple of (symbol, exponent) pairs sorted by symbol,
# with strictly positive integer exponents; the empty tuple is the constant
# monomial.
_Key = tuple[tuple[str, int], ...]
_Poly = dict[_Key, Fraction]

Scalar = Union[int, Fraction, "CoefficientExpr"]

# Registered square-root symbols: name -> polynomial replacement for the
# symbol's square.  Replacements never contain square-root symbols.
_SQRT_RULES: dict[str, _Poly] = {}


def _pzero() -> _Poly:
    return {}

def _pconst(c: Fraction) -> _Poly:
    return {(): c} if c else {}

def _psym(name: str) -> _Poly:
    return {((name, 1),): Fraction(1)}

def _padd(a: _Poly, b: _Poly) -> _Poly:
    out = dict(a)
    for key, coef in b.items():
        tot = out.get(key, Fraction(0)) + coef
        if tot:
            out[key] = tot
        elif key in out:
            del out[key]
    return out

def _pneg(a: _Poly) -> _Poly:
    return {key: -coef for key, coef in a.items()}

def _pscale(a: _Poly, c: Fraction) -> _Poly:
    if not c:
        return {}
    return {key: coef * c for key, coef in a.items()}

def _key_mul(a: _Key, b: _Key) -> _Key:
    exps: dict[str, int] = dict(a)
    for name, exp in b:
        exps[name] = exps.get(name, 0) + exp
    return tuple(sorted(exps.items()))

def _reduce_key(key: _Key, coef: Fraction) -> _Poly:
    """Rewrite squares of square-root symbols in one monomial."""
    plain: list[tuple[str, int]] = []
    replacements: list[_Poly] = []
    for name, exp in key:
        rule = _SQRT_RULES.get(name)
        if rule is None or exp < 2:
            plain.append((name, exp))
            continue
        replacements.append(_ppow(rule, exp // 2))
        if exp % 2:
            plain.append((name, 1))
    out: _Poly = {tuple(sorted(plain)): coef}
    for rep in replacements:
        out = _pmul_raw(out, rep)
    return out

def _pmul_raw(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = _key_mul(ka, kb)
            tot = out.get(key, Fraction(0)) + ca * cb
            if tot:
                out[key] = tot
            elif key in out:
                del out[key]
    return out

def _pmul(a: _Poly, b: _Poly) -> _Poly:
    raw = _pmul_raw(a, b)
    out: _Poly = {}
    for key, coef in raw.items():
        if any(name in _SQRT_RULES and exp >= 2 for name, exp in key):
            out = _padd(out, _reduce_key(key, coef))
        else:
            tot = out.get(key, Fraction(0)) + coef
            if tot:
                out[key] = tot
            elif key in out:
                del out[key]
    return out

def _ppow(a: _Poly, n: int) -> _Poly:
    out = _pconst(Fraction(1))
    for _ in range(n):
        out = _pmul(out, a)
    return out

def _pcontent(a: _Poly) -> Fraction:
    """Positive rational content (gcd of numerators over lcm of denominators)."""
    if not a:
        return Fraction(1)
    num = 0
    den = 1
    for coef in a.values():
        num = math.gcd(num, coef.numerator)
        den = den * coef.denominator // math.gcd(den, coef.denominator)
    return Fraction(num, den) if num else Fraction(1)

def _pmonomial_content(a: _Poly) -> _Key:
    """Largest monomial dividing every term."""
    if not a:
        return ()
    common: dict[str, int] | None = None
    for key in a:
        exps = dict(key)
        if common is None:
            common = exps
        else:
            common = {
                name: min(exp, exps[name])
                for name, exp in common.items()
                if name in exps
            }
        if not common:
            return ()
    assert common is not None
    return tuple(sorted((n, e) for n, e in common.items() if e > 0))

def _key_div(key: _Key, div: _Key) -> _Key:
    exps = dict(key)
    for name, exp in div:
        exps[name] -= exp
        if not exps[name]:
            del exps[name]
    return tuple(sorted(exps.items()))


def _fmt_key(key: _Key) -> str:
    parts = []
    for name, exp in key:
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return "*".join(parts)

def _fmt_poly(a: _Poly) -> str:
    if not a:
        return "0"
    chunks = []
    for key in sorted(a):
        coef = a[key]
        sym = _fmt_key(key)
        if not sym:
            body = str(abs(coef))
        elif abs(coef) == 1:
            body = sym
        else:
            body = f"{abs(coef)}*{sym}"
        sign = "-" if coef < 0 else "+"
        chunks.append((sign, body))
    first_sign, first_body = chunks[0]
    text = (first_sign if first_sign == "-" else "") + first_body
    for sign, body in chunks[1:]:
        text += f" {sign} {body}"
    return text


class CoefficientExpr:
    """An exact rational function of named parameters.

    Construct through :meth:`from_rational`, :meth:`symbol` or :meth:`sqrt`,
    then combine with ``+ - * / **``.  Integer and :class:`~fractions.Fraction`
    operands are accepted on either side.

    Instances are immutable.  Equality compares values (cross-multiplication),
    so two structurally different quotients of the same rational function
    compare equal; instances are deliberately unhashable.
    """

    __slots__ = ("_num", "_den")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, num: _Poly, den: _Poly) -> None:
        if not den:
            raise AlgebraError("coefficient with zero denominator")
        self._num, self._den = self._normalized(num, den)

    @staticmethod
    def _normalized(num: _Poly, den: _Poly) -> tuple[_Poly, _Poly]:
        if not num:
            return {}, _pconst(Fraction(1))
        # Rationalize square-root symbols out of the denominator.
        odd = {
            name
            for key in den
            for name, exp in key
            if name in _SQRT_RULES and exp % 2
        }
        for name in sorted(odd):
            mult = _psym(name)
            num = _pmul(num, mult)
            den = _pmul(den, mult)
        # Strip common rational and monomial content.
        mon = _pmonomial_content(num)
        dmon = _pmonomial_content(den)
        common = tuple(
            (name, min(exp, dict(dmon).get(name, 0)))
            for name, exp in mon
            if dict(dmon).get(name, 0)
        )
        common = tuple((n, e) for n, e in common if e > 0)
        if common:
            num = {_key_div(k, common): c for k, c in num.items()}
            den = {_key_div(k, common): c for k, c in den.items()}
        scale = _pcontent(den)
        # Make the denominator's leading (smallest-key) coefficient positive.
        lead = den[min(den)]
        if lead < 0:
            scale = -scale
        num = _pscale(num, 1 / scale)
        den = _pscale(den, 1 / scale)
        return num, den

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_rational(cls, value: int | Fraction) -> CoefficientExpr:
        """Wrap an integer or fraction as a constant coefficient."""
        return cls(_pconst(Fraction(value)), _pconst(Fraction(1)))

    @classmethod
    def symbol(cls, name: str) -> CoefficientExpr:
        """A free parameter symbol.

        Names of the form ``sqrt_*`` and ``s<integer>`` are reserved for
        square roots and rejected here.
        """
        if not name or not name[0].isalpha() or not name.replace("_", "").isalnum():
            raise AlgebraError(f"invalid symbol name {name!r}")
        reserved = name.startswith("sqrt_") or (name[0] == "s" and name[1:].isdigit())
        if reserved or name in _SQRT_RULES:
            raise AlgebraError(f"{name!r} is a reserved square-root symbol")
        return cls(_psym(name), _pconst(Fraction(1)))

    @classmethod
    def sqrt(cls, arg: Scalar) -> CoefficientExpr:
        """Exact square root of a nonnegative rational or parameter monomial.

        Perfect squares reduce immediately; otherwise square-root symbols
        with the appropriate reduction rule are introduced (``s2`` for the
        squarefree integer part, ``sqrt_<name>`` per parameter).  The
        argument must be a single monomial with denominator 1.
        """
        expr = _as_expr(arg)
        if len(expr._num) != 1 or expr._den != _pconst(Fraction(1)):
            raise AlgebraError("sqrt argument must be a single parameter monomial")
        ((key, coef),) = expr._num.items()
        if coef < 0:
            raise AlgebraError("sqrt of a negative coefficient")
        out_key: dict[str, int] = {}
        out_coef = Fraction(1)
        for name, exp in key:
            if name in _SQRT_RULES:
                raise AlgebraError("nested square roots are not supported")
            out_key[name] = out_key.get(name, 0) + (exp // 2)
            if exp % 2:
                root = f"sqrt_{name}"
                _SQRT_RULES.setdefault(root, _psym(name))
                out_key[root] = out_key.get(root, 0) + 1
        # Split the rational into a square part and a squarefree remainder.
        def split_square(value: int) -> tuple[int, int]:
            square, free, factor = 1, value, 2
            while factor * factor <= free:
                while free % (factor * factor) == 0:
                    free //= factor * factor
                    square *= factor
                factor += 1
            return square, free

        num_square, num_free = split_square(coef.numerator)
        den_square, den_free = split_square(coef.denominator)
        out_coef *= Fraction(num_square, den_square)
        for free, invert in ((num_free, False), (den_free, True)):
            if free > 1:
                name = f"s{free}"
                _SQRT_RULES.setdefault(name, _pconst(Fraction(free)))
                out_key[name] = out_key.get(name, 0) + 1
                if invert:
                    out_coef /= free  # 1/sqrt(d) = sqrt(d)/d
        mono: _Poly = {tuple(sorted((n, e) for n, e in out_key.items() if e)): out_coef}
        return cls(_pmul(mono, _pconst(Fraction(1))), _pconst(Fraction(1)))

    # -- predicates ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._num

    @property
    def is_rational(self) -> bool:
        """True when the value is a plain rational number."""
        num_const = not self._num or self._num.keys() == {()}
        den_const = self._den.keys() == {()}
        return num_const and den_const

    def as_fraction(self) -> Fraction:
        """The value as a fraction; raises if parameters remain."""
        if not self.is_rational:
            raise AlgebraError(f"{self} is not a plain rational")
        num = self._num.get((), Fraction(0))
        return num / self._den[()]

    def symbols(self) -> set[str]:
        """Free parameter names, excluding square-root symbols."""
        out = set()
        for poly in (self._num, self._den):
            for key in poly:
                for name, _ in key:
                    if name not in _SQRT_RULES:
                        out.add(name)
        return out

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: Scalar) -> CoefficientExpr:
        o = _as_expr(other)
        num = _padd(_pmul(self._num, o._den), _pmul(o._num, self._den))
        return CoefficientExpr(num, _pmul(self._den, o._den))

    __radd__ = __add__

    def __neg__(self) -> CoefficientExpr:
        return CoefficientExpr(_pneg(self._num), dict(self._den))

    def __sub__(self, other: Scalar) -> CoefficientExpr:
        return self + (-_as_expr(other))

    def __rsub__(self, other: Scalar) -> CoefficientExpr:
        return _as_expr(other) + (-self)

    def __mul__(self, other: Scalar) -> CoefficientExpr:
        o = _as_expr(other)
        return CoefficientExpr(_pmul(self._num, o._num), _pmul(self._den, o._den))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> CoefficientExpr:
        o = _as_expr(other)
        if o.is_zero:
            raise AlgebraError("division by zero coefficient")
        return CoefficientExpr(_pmul(self._num, o._den), _pmul(self._den, o._num))

    def __rtruediv__(self, other: Scalar) -> CoefficientExpr:
        return _as_expr(other) / self

    def __pow__(self, n: int) -> CoefficientExpr:
        if n < 0:
            return CoefficientExpr.from_rational(1) / self ** (-n)
        return CoefficientExpr(_ppow(self._num, n), _ppow(self._den, n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (int, Fraction, CoefficientExpr)):
            return NotImplemented
        o = _as_expr(other)
        diff = _padd(_pmul(self._num, o._den), _pneg(_pmul(o._num, self._den)))
        return not diff

    # -- evaluation ------------------------------------------------------

    def substitute(self, mapping: Mapping[str, Scalar]) -> CoefficientExpr:
        """Replace parameter symbols by coefficient expressions.

        Square-root symbols follow their base parameter: substituting for
        ``eps`` rewrites ``sqrt_eps`` as the square root of the replacement
        (which must itself be a parameter monomial).
        """
        exprs = {name: _as_expr(value) for name, value in mapping.items()}

        def subst_poly(poly: _Poly) -> CoefficientExpr:
            total = CoefficientExpr.from_rational(0)
            for key, coef in poly.items():
                term = CoefficientExpr.from_rational(coef)
                for name, exp in key:
                    if name in exprs:
                        base = exprs[name]
                    elif name.startswith("sqrt_") and name[5:] in exprs:
                        base = CoefficientExpr.sqrt(exprs[name[5:]])
                    else:
                        base = CoefficientExpr(_psym(name), _pconst(Fraction(1)))
                    term = term * base**exp
                total = total + term
            return total

        return subst_poly(self._num) / subst_poly(self._den)

    def evaluate(self, bindings: Mapping[str, float] | None = None) -> float:
        """Numeric value with parameters bound to floats.

        Square-root symbols evaluate through their reduction rule; names of
        the form ``abs_<p>`` fall back to ``abs`` of the binding for ``<p>``.
        """
        bindings = dict(bindings or {})

        def sym_value(name: str) -> float:
            if name in bindings:
                return float(bindings[name])
            rule = _SQRT_RULES.get(name)
            if rule is not None:
                return math.sqrt(poly_value(rule))
            if name.startswith("abs_") and name[4:] in bindings:
                return abs(float(bindings[name[4:]]))
            raise AlgebraError(f"unbound parameter {name!r}")

        def poly_value(poly: _Poly) -> float:
            total = 0.0
            for key, coef in poly.items():
                term = float(coef)
                for name, exp in key:
                    term *= sym_value(name) ** exp
                total += term
            return total

        den = poly_value(self._den)
        if den == 0.0:
            raise AlgebraError("denominator evaluates to zero")
        return poly_value(self._num) / den

    def __str__(self) -> str:
        num = _fmt_poly(self._num)
        if self._den == _pconst(Fraction(1)):
            return num
        den = _fmt_poly(self._den)
        if len(self._num) > 1:
            num = f"({num})"
        if len(self._den) > 1 or "*" in den or "^" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"CoefficientExpr({self})"


def _as_expr(value: Scalar) -> CoefficientExpr:
    if isinstance(value, CoefficientExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return CoefficientExpr.from_rational(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to CoefficientExpr")


def coeff(value: Scalar | str) -> CoefficientExpr:
    """Convenience constructor: number, symbol name, or existing expression."""
    if isinstance(value, str):
        return CoefficientExpr.symbol(value)
    return _as_expr(value)


ZERO = CoefficientExpr.from_rational(0)
ONE = CoefficientExpr.from_rational(1)


# -- expression parser ---------------------------------------------------

class _Tokenizer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def __iter__(self) -> Iterator[str]:
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
            elif ch in "+-*/^()":
                yield ch
                i += 1
            elif ch.isdigit() or ch == ".":
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                yield text[i:j]
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                yield text[i:j]
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r} in coefficient")


def parse_coefficient(text: str) -> CoefficientExpr:
    """Parse an expression like ``"3/8*alpha^2*sqrt(2*eps)"``.

    Supports ``+ - * / ^``, parentheses, integer and decimal literals
    (decimals are read exactly), parameter names, and ``sqrt(...)``.
    """
    tokens = list(_Tokenizer(text))
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError(f"unexpected end of coefficient {text!r}")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r} in {text!r}")
        pos += 1
        return tok

    def parse_sum() -> CoefficientExpr:
        value = parse_product()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def parse_product() -> CoefficientExpr:
        value = parse_power()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_power()
            try:
                value = value * rhs if op == "*" else value / rhs
            except AlgebraError as exc:
                raise ParseError(str(exc)) from exc
        return value

    def parse_power() -> CoefficientExpr:
        base = parse_atom()
        if peek() == "^":
            take()
            sign = 1
            if peek() == "-":
                take()
                sign = -1
            exp_tok = take()
            if not exp_tok.isdigit():
                raise ParseError(f"integer exponent expected in {text!r}")
            return base ** (sign * int(exp_tok))
        return base

    def parse_atom() -> CoefficientExpr:
        tok = take()
        if tok == "(":
            value = parse_sum()
            take(")")
            return value
        if tok == "-":
            return -parse_atom()
        if tok == "+":
            return parse_atom()
        if tok[0].isdigit() or tok[0] == ".":
            try:
                value = Fraction(tok)
            except ValueError as exc:
                raise ParseError(f"bad numeric literal {tok!r}") from exc
            return CoefficientExpr.from_rational(value)
        if tok == "sqrt":
            take("(")
            inner = parse_sum()
            take(")")
            try:
                return CoefficientExpr.sqrt(inner)
            except AlgebraError as exc:
                raise ParseError(str(exc)) from exc
        try:
            return CoefficientExpr.symbol(tok)
        except AlgebraError as exc:
            raise ParseError(str(exc)) from exc

    value = parse_sum()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens in coefficient {text!r}")
    return value
