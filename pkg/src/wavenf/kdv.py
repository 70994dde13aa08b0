"""Hierarchy structure behind the second-order normal forms.

The single-variable flows that show up after decoupling are measured
against the first levels of the KdV hierarchy: the vector fields kappa_3
and kappa_5, the integrals I0, I1, I3 and an exact membership test of a
computed normal form against their span.  A pseudospectral integrator
for single-variable dispersive densities on the circle rounds this out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from wavenf.algebra.coefficients import CoefficientExpr, Scalar, _as_expr
from wavenf.algebra.densities import (
    AntiDerivFactor,
    DensityPolynomial,
    density,
    local,
)
from wavenf.algebra.numeric import PeriodicField
from wavenf.algebra.observables import ObservableExpr, integrate as integrate_density
from wavenf.errors import AlgebraError, BlowUpError


@dataclass(frozen=True)
class HierarchyField:
    """Vector field at the first or second level of the hierarchy.

    ``order`` selects kappa_3 = gamma w w_x + w_xxx or
    kappa_5 = (5/6)gamma^2 w^2 w_x + (10/3)gamma w_x w_xx
    + (5/3)gamma w w_xxx + w_xxxxx.
    """

    gamma: Scalar | CoefficientExpr
    order: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", _as_expr(self.gamma))
        if self.order not in (3, 5):
            raise AlgebraError("hierarchy field order must be 3 or 5")

    def density(self, var: str = "w") -> DensityPolynomial:
        g = self.gamma
        w = local(var)
        wx = local(var, 1)
        if self.order == 3:
            return density((g, [w, wx]), (1, [local(var, 3)]))
        return density(
            (g * g * Fraction(5, 6), [w, w, wx]),
            (g * Fraction(10, 3), [wx, local(var, 2)]),
            (g * Fraction(5, 3), [w, local(var, 3)]),
            (1, [local(var, 5)]),
        )


@dataclass(frozen=True)
class HierarchyIntegrals:
    """Densities of the first conserved integrals, I0, I1 and I3.

    Pairwise Poisson-commuting under the one-component bracket
    {F, G} = integral of (dF/dw) d/dx (dG/dw).
    """

    gamma: Scalar | CoefficientExpr
    var: str = "w"

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", _as_expr(self.gamma))

    @property
    def i0(self) -> DensityPolynomial:
        w = local(self.var)
        return density((1, [w, w]))

    @property
    def i1(self) -> DensityPolynomial:
        w = local(self.var)
        return density(
            (self.gamma / 3, [w, w, w]),
            (1, [w, local(self.var, 2)]),
        )

    @property
    def i3(self) -> DensityPolynomial:
        w = local(self.var)
        wxx = local(self.var, 2)
        return density(
            (self.gamma * self.gamma * Fraction(5, 36), [w, w, w, w]),
            (self.gamma * Fraction(5, 6), [w, w, wxx]),
            (1, [wxx, wxx]),
        )


def single_variable_part(obs: ObservableExpr, var: str) -> ObservableExpr:
    """The var-local part of a normal form: single integrals over ``var``
    plus every product-of-integrals term touching ``var`` (those become
    frequency shifts in the membership report)."""
    out = ObservableExpr.zero()
    for atoms, c in obs:
        involved = {f.var for atom in atoms for f in atom}
        if len(atoms) == 1:
            if involved == {var}:
                out = out + ObservableExpr.from_atom(atoms[0], c)
        elif var in involved:
            term = ObservableExpr.from_atom(atoms[0])
            for extra in atoms[1:]:
                term = term * ObservableExpr.from_atom(extra)
            out = out + term.scaled(c)
    return out


@dataclass(frozen=True)
class MatchReport:
    """Result of matching a normal form against the hierarchy span."""

    gamma: CoefficientExpr
    coefficients: dict[str, CoefficientExpr]
    residual: ObservableExpr
    frequency_shifts: ObservableExpr
    nonlinear_ratio_consistent: bool

    @property
    def is_member(self) -> bool:
        return self.residual.is_zero

    def __str__(self) -> str:
        lines = [
            f"gamma = {self.gamma}",
            "coefficients: "
            + ", ".join(f"{k} = {v}" for k, v in self.coefficients.items()),
            f"member of span: {self.is_member}",
            f"nonlinear ratio consistent: {self.nonlinear_ratio_consistent}",
        ]
        if not self.residual.is_zero:
            lines.append(f"residual: {self.residual}")
        if not self.frequency_shifts.is_zero:
            lines.append(f"frequency shifts: {self.frequency_shifts}")
        return "\n".join(lines)


def _split_pure(obs: ObservableExpr) -> tuple[ObservableExpr, ObservableExpr, set[str]]:
    pure = ObservableExpr.zero()
    shifts = ObservableExpr.zero()
    variables: set[str] = set()
    for atoms, c in obs:
        if len(atoms) == 1:
            if any(isinstance(f, AntiDerivFactor) for f in atoms[0]):
                raise AlgebraError("membership test expects canonicalized local atoms")
            variables.update(f.var for f in atoms[0])
            pure = pure + ObservableExpr.from_atom(atoms[0], c)
        else:
            term = ObservableExpr.from_atom(atoms[0])
            for extra in atoms[1:]:
                term = term * ObservableExpr.from_atom(extra)
            shifts = shifts + term.scaled(c)
    return pure, shifts, variables


def hierarchy_match(z2: ObservableExpr, z4: ObservableExpr) -> MatchReport:
    """Match a second-order normal form against span{I3, I1, I0}.

    ``gamma`` is read off the first order via Z2 proportional to I1(gamma)
    modulo I0 (with w w_xx canonicalized to -w_x^2, so
    gamma = -3 c(w^3)/c(w_x^2)); the quartic order is then solved exactly
    as Z4 = c3 I3 + c1 I1 + c0 I0, pivoting c3 on the w_xx^2 atom.
    Product-of-integrals terms are excluded from the span and reported as
    frequency shifts.  The report also carries the one-scalar diagnostic
    c(w^4)/c(w w_x^2) == -gamma/12, which isolates the nonlinear sector.
    """
    z2_pure, z2_shifts, vars2 = _split_pure(z2)
    z4_pure, z4_shifts, vars4 = _split_pure(z4)
    variables = vars2 | vars4
    if len(variables) != 1:
        raise AlgebraError(
            "membership test needs a single-variable normal form part "
            f"(got variables {sorted(variables)})"
        )
    var = variables.pop()
    w = local(var)
    wx = local(var, 1)
    wxx = local(var, 2)

    c_w3 = z2_pure.coefficient_of([w, w, w])
    c_wx2 = z2_pure.coefficient_of([wx, wx])
    if c_wx2.is_zero:
        raise AlgebraError("not KdV at leading order: no dispersive w_x^2 term")
    gamma = -3 * c_w3 / c_wx2
    integrals = HierarchyIntegrals(gamma, var=var)
    leading = integrate_density(integrals.i1).scaled(-c_wx2) + integrate_density(
        integrals.i0
    ).scaled(z2_pure.coefficient_of([w, w]))
    if not (z2_pure - leading).is_zero:
        raise AlgebraError(
            "not KdV at leading order: Z2 is not in span{I1(gamma), I0}"
        )

    c3 = z4_pure.coefficient_of([wxx, wxx])
    c1 = -z4_pure.coefficient_of([wx, wx])
    c0 = z4_pure.coefficient_of([w, w])
    combo = (
        integrate_density(integrals.i3).scaled(c3)
        + integrate_density(integrals.i1).scaled(c1)
        + integrate_density(integrals.i0).scaled(c0)
    )
    residual = z4_pure - combo

    c_w4 = z4_pure.coefficient_of([w, w, w, w])
    c_wwx2 = z4_pure.coefficient_of([w, wx, wx])
    ratio_ok = (12 * c_w4 + gamma * c_wwx2).is_zero

    return MatchReport(
        gamma=gamma,
        coefficients={"I3": c3, "I1": c1, "I0": c0},
        residual=residual,
        frequency_shifts=z2_shifts + z4_shifts,
        nonlinear_ratio_consistent=ratio_ok,
    )


# -- pseudospectral integration -----------------------------------------

_SCHEMES = ("ETDRK4", "IFRK4")


@dataclass(frozen=True)
class SpectralSolverConfig:
    """Grid, step and scheme choices for the circle integrator.

    ``explicit_cfl`` records dt times the largest advective third-order
    symbol, dt (pi N)^3; both schemes here treat the linear part exactly,
    so the number is informational for explicit-stepping comparisons.
    """

    size: int = 256
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "ETDRK4"
    dealias: bool = True
    sample_every: int | None = None

    def __post_init__(self) -> None:
        n = self.size
        if n < 16 or n & (n - 1):
            raise AlgebraError("grid size must be a power of two, at least 16")
        if self.dt <= 0 or self.t_end <= 0:
            raise AlgebraError("time step and end time must be positive")
        if self.scheme not in _SCHEMES:
            raise AlgebraError(f"scheme must be one of {_SCHEMES}")
        if self.sample_every is not None and self.sample_every < 1:
            raise AlgebraError("sample_every must be a positive step count")

    @property
    def explicit_cfl(self) -> float:
        return self.dt * (math.pi * self.size) ** 3

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of a spectral run on the unit circle."""

    times: np.ndarray
    states: np.ndarray
    config: SpectralSolverConfig

    def field(self, index: int) -> PeriodicField:
        return PeriodicField(self.states[index])

    @property
    def final(self) -> PeriodicField:
        return PeriodicField(self.states[-1])


def _split_rhs(
    rhs: DensityPolynomial, params: dict[str, float] | None
) -> tuple[str, list[tuple[float, int]], list[tuple[float, tuple[int, ...]]]]:
    """Separate a right-hand-side density into linear and product terms."""
    variables: set[str] = set()
    linear: list[tuple[float, int]] = []
    products: list[tuple[float, tuple[int, ...]]] = []
    for m in rhs.terms:
        orders = []
        for f in m.factors:
            if isinstance(f, AntiDerivFactor):
                raise AlgebraError("nonlocal right-hand sides are not supported")
            variables.add(f.var)
            orders.append(f.order if f.var != "q_x" else f.order + 1)
        value = m.coeff.evaluate(params or {})
        if len(orders) == 1:
            linear.append((value, orders[0]))
        else:
            products.append((value, tuple(sorted(orders))))
    if len(variables) > 1:
        raise AlgebraError("the circle integrator handles one field variable")
    return (variables.pop() if variables else "w"), linear, products


class _Stepper:
    """One spectral step of w_t = L w + N(w) on rfft coefficients."""

    def __init__(
        self,
        cfg: SpectralSolverConfig,
        linear: list[tuple[float, int]],
        products: list[tuple[float, tuple[int, ...]]],
    ) -> None:
        n = cfg.size
        k = np.arange(n // 2 + 1)
        ik = 2j * np.pi * k
        self.symbol = np.zeros(n // 2 + 1, dtype=complex)
        for value, order in linear:
            self.symbol += value * ik**order
        self.products = products
        self.orders = sorted({o for _, orders in products for o in orders})
        self.ik = ik
        self.n = n
        mask = np.ones(n // 2 + 1)
        if cfg.dealias:
            mask[k > n // 3] = 0.0
        mask[-1] = 0.0  # drop the ambiguous Nyquist bin
        self.mask = mask
        dt = cfg.t_end / cfg.steps
        self.dt = dt
        if cfg.scheme == "IFRK4":
            self.half = np.exp(self.symbol * dt / 2)
            self.half_inv = np.exp(-self.symbol * dt / 2)
        else:
            self._etdrk4_tables(dt)

    def _etdrk4_tables(self, dt: float) -> None:
        # Full-circle contour quadrature for the phi functions (stable
        # near L = 0; the half-circle shortcut only works for real symbols).
        points = 32
        theta = np.exp(2j * np.pi * (np.arange(1, points + 1) - 0.5) / points)
        lr = dt * self.symbol[:, None] + theta[None, :]
        elr = np.exp(lr)
        self.e_full = np.exp(dt * self.symbol)
        self.e_half = np.exp(dt * self.symbol / 2)
        self.q = dt * np.mean((np.exp(lr / 2) - 1) / lr, axis=1)
        self.f1 = dt * np.mean(
            (-4 - lr + elr * (4 - 3 * lr + lr**2)) / lr**3, axis=1
        )
        self.f2 = dt * np.mean((2 + lr + elr * (-2 + lr)) / lr**3, axis=1)
        self.f3 = dt * np.mean(
            (-4 - 3 * lr - lr**2 + elr * (4 - lr)) / lr**3, axis=1
        )

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        if not self.products:
            return np.zeros_like(v)
        vm = v * self.mask
        grids = {o: np.fft.irfft(vm * self.ik**o, n=self.n) for o in self.orders}
        total = np.zeros(self.n)
        for value, orders in self.products:
            term = grids[orders[0]].copy()
            for o in orders[1:]:
                term *= grids[o]
            total += value * term
        return np.fft.rfft(total) * self.mask

    def step_etdrk4(self, v: np.ndarray) -> np.ndarray:
        nv = self.nonlinear(v)
        a = self.e_half * v + self.q * nv
        na = self.nonlinear(a)
        b = self.e_half * v + self.q * na
        nb = self.nonlinear(b)
        c = self.e_half * a + self.q * (2 * nb - nv)
        nc = self.nonlinear(c)
        return self.e_full * v + nv * self.f1 + 2 * (na + nb) * self.f2 + nc * self.f3

    def step_ifrk4(self, v: np.ndarray) -> np.ndarray:
        dt = self.dt
        k1 = dt * self.nonlinear(v)
        k2 = dt * self.half_inv * self.nonlinear(self.half * (v + k1 / 2))
        k3 = dt * self.half_inv * self.nonlinear(self.half * (v + k2 / 2))
        full = self.half * self.half
        full_inv = self.half_inv * self.half_inv
        k4 = dt * full_inv * self.nonlinear(full * (v + k3))
        return full * (v + (k1 + 2 * k2 + 2 * k3 + k4) / 6)


def integrate(
    rhs: DensityPolynomial,
    w0: PeriodicField,
    cfg: SpectralSolverConfig,
    params: dict[str, float] | None = None,
) -> Trajectory:
    """Evolve w_t = rhs(w) pseudospectrally on the unit circle.

    The single-factor part of ``rhs`` is applied exactly in Fourier
    space; products are formed on the grid under the 2/3 dealiasing
    rule.  The initial state is resampled to the configured grid and
    must be zero-mean and band-limited below 2N/3.
    """
    _, linear, products = _split_rhs(rhs, params)
    if abs(w0.mean()) > 1e-12:
        raise AlgebraError("initial state must have zero mean")
    if w0.bandwidth() >= (2 * cfg.size) // 3:
        raise AlgebraError("initial state is not band-limited below 2N/3")
    w0 = w0.resampled(cfg.size)

    stepper = _Stepper(cfg, linear, products)
    advance = stepper.step_etdrk4 if cfg.scheme == "ETDRK4" else stepper.step_ifrk4
    steps = cfg.steps
    dt = cfg.t_end / steps
    cadence = cfg.sample_every or max(1, steps // 200)

    v = np.fft.rfft(w0.values) * stepper.mask
    times = [0.0]
    states = [np.fft.irfft(v, n=cfg.size)]
    for i in range(1, steps + 1):
        v = advance(v)
        if not np.all(np.isfinite(v)):
            raise BlowUpError("non-finite spectral state", time=i * dt)
        if i % cadence == 0 or i == steps:
            grid = np.fft.irfft(v, n=cfg.size)
            if not np.all(np.isfinite(grid)) or np.max(np.abs(grid)) > 1e12:
                raise BlowUpError("solution left the resolvable range", time=i * dt)
            times.append(i * dt)
            states.append(grid)
    return Trajectory(np.array(times), np.array(states), cfg)
