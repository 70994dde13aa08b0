"""Periodic oscillator chains and their long-wave mode dynamics.

The chain couples nearest neighbours through the anharmonic potential

    phi(z) = z^2/2 + alpha z^3/3 + beta z^4/4 + gamma z^degree / degree,

with ``degree == 0`` meaning no monomial tail beyond the quartic term.
The module provides symplectic stepping (velocity-Verlet and its
fourth-order composition), harmonic mode energies, packet-localization
runs started from a single excited mode, and a quantitative comparison
against the two decoupled continuum flows produced by the normal-form
solver.

Stepping dispatches to a compiled kernel when the extension built from
``_kernels.pyx`` is importable, and otherwise to the numpy fallback in
``_kernels_py``.  Set ``WAVENF_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from wavenf.algebra.densities import DensityPolynomial
from wavenf.algebra.numeric import PeriodicField
from wavenf.algebra.observables import ObservableExpr
from wavenf.algebra.variational import PoissonStructure, vector_field
from wavenf.errors import BlowUpError
from wavenf.kdv import SpectralSolverConfig, integrate as integrate_flow
from wavenf.normalform import background_k0

if TYPE_CHECKING:
    from wavenf.normalform import NormalFormResult

if os.environ.get("WAVENF_PURE_PYTHON"):
    from . import _kernels_py as _kernels

    _BACKEND = "python"
else:
    try:
        from . import _kernels  # type: ignore[no-redef]

        _BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _kernels  # type: ignore[no-redef]

        _BACKEND = "python"

_SCHEMES = ("verlet", "yoshida4")


def backend_name() -> str:
    """Name of the stepping backend selected at import time."""
    return _BACKEND


@dataclass(frozen=True)
class LatticeState:
    """Positions and momenta of a periodic chain of unit masses.

    ``degree`` switches on the extra tail ``gamma z^degree / degree`` of
    the bond potential and must be at least 3 when nonzero; the cubic
    and quartic slots are already covered by ``alpha`` and ``beta``.
    """

    q: np.ndarray
    p: np.ndarray
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    degree: int = 0

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.ndim != 1 or q.shape != p.shape:
            raise ValueError("q and p must be 1-d arrays of equal length")
        if q.size < 4:
            raise ValueError("need at least 4 oscillators")
        if self.degree and self.degree < 3:
            raise ValueError("degree tail must have degree >= 3")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def size(self) -> int:
        return self.q.size

    def stretches(self) -> np.ndarray:
        """Bond elongations q_{j+1} - q_j with the periodic wrap."""
        return np.roll(self.q, -1) - self.q

    def energy(self) -> float:
        """Total energy, kinetic plus bond potential."""
        z = self.stretches()
        pot = z * z / 2 + self.alpha * z**3 / 3 + self.beta * z**4 / 4
        if self.degree:
            pot = pot + self.gamma * z**self.degree / self.degree
        return float(np.sum(self.p * self.p / 2) + np.sum(pot))

    def harmonic_energy(self) -> float:
        """Quadratic part of the energy, sum of p^2/2 + z^2/2."""
        z = self.stretches()
        return float(np.sum(self.p * self.p / 2) + np.sum(z * z / 2))

    def momentum(self) -> float:
        return float(np.sum(self.p))


def single_mode_state(
    size: int,
    mode: int,
    c0: float = 1.0,
    *,
    alpha: float = 0.0,
    beta: float = 0.0,
    gamma: float = 0.0,
    degree: int = 0,
) -> LatticeState:
    """Standing cosine wave feeding the mirror pair ``+-mode``.

    With ``mu = mode / size`` the amplitude is chosen so that each of
    the two excited bins starts with harmonic energy
    ``E_mode(0) = size * c0 * mu^4``, the specific energy being
    ``c0 * mu^4``.  Momenta start at zero, so the total momentum is
    exactly zero for the whole run.
    """
    if not 1 <= mode < size / 2:
        raise ValueError("mode must lie strictly between 0 and size/2")
    mu = mode / size
    omega = 2.0 * math.sin(math.pi * mu)
    amplitude = 2.0 * math.sqrt(2.0 * c0) * mu * mu / omega
    j = np.arange(size)
    q = amplitude * np.cos(2.0 * np.pi * mode * j / size)
    p = np.zeros(size)
    return LatticeState(q, p, alpha=alpha, beta=beta, gamma=gamma, degree=degree)


@dataclass(frozen=True)
class ModeSpectrum:
    """Harmonic energies per discrete Fourier bin k = 0 .. size-1."""

    energies: np.ndarray
    frequencies: np.ndarray

    @property
    def size(self) -> int:
        return self.energies.size

    @property
    def kappa(self) -> np.ndarray:
        """Wavenumbers k / size in [0, 1)."""
        return np.arange(self.size) / self.size

    @property
    def specific(self) -> np.ndarray:
        """Specific energies E_k / size."""
        return self.energies / self.size

    def total(self) -> float:
        return float(self.energies.sum())


def mode_energies(state: LatticeState) -> ModeSpectrum:
    """Harmonic mode energies E_k = (|phat_k|^2 + omega_k^2 |qhat_k|^2) / 2.

    The transform is the size-normalized DFT (unitary), and
    omega_k = 2 |sin(pi k / size)|.  The energies sum to the harmonic
    part of the chain energy, which the suite checks against the direct
    sum of p^2/2 + stretch^2/2.
    """
    n = state.size
    qhat = np.fft.fft(state.q) / math.sqrt(n)
    phat = np.fft.fft(state.p) / math.sqrt(n)
    omega = 2.0 * np.abs(np.sin(np.pi * np.arange(n) / n))
    energies = 0.5 * (np.abs(phat) ** 2 + omega**2 * np.abs(qhat) ** 2)
    return ModeSpectrum(energies=energies, frequencies=omega)


def step(state: LatticeState, dt: float, steps: int = 1, scheme: str = "yoshida4") -> LatticeState:
    """Advance the chain and return the new state.

    ``scheme`` is "verlet" (order 2) or "yoshida4" (order 4 triple-jump
    composition); both are symplectic and time-reversible.  Raises
    BlowUpError when the state leaves the finite range.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    q = np.ascontiguousarray(state.q, dtype=float).copy()
    p = np.ascontiguousarray(state.p, dtype=float).copy()
    runner = _kernels.run_verlet if scheme == "verlet" else _kernels.run_yoshida4
    runner(q, p, float(dt), int(steps), state.alpha, state.beta, state.gamma, state.degree)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise BlowUpError("chain state became non-finite", time=steps * dt)
    return replace(state, q=q, p=p)


@dataclass(frozen=True)
class LocalizationExperiment:
    """A single-mode run in the long-wave regime mu = mode/size <= 1/8.

    The chain is integrated to the horizon t_final / mu^3, the natural
    time span over which the excited long wave exchanges energy with
    its harmonics.
    """

    size: int = 32
    mode: int = 1
    c0: float = 1.0
    t_final: float = 1.0
    dt: float = 0.1
    scheme: str = "yoshida4"
    alpha: float = 0.25
    beta: float = 0.0
    gamma: float = 0.0
    degree: int = 0

    def __post_init__(self) -> None:
        if self.size < 8:
            raise ValueError("need at least 8 oscillators")
        if not 1 <= self.mode < self.size / 2:
            raise ValueError("mode must lie strictly between 0 and size/2")
        if self.mu > 0.125 + 1e-12:
            raise ValueError("long-wave regime needs mu = mode/size <= 1/8")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def mu(self) -> float:
        return self.mode / self.size

    @property
    def horizon(self) -> float:
        """Integration span t_final / mu^3."""
        return self.t_final / self.mu**3

    def initial_state(self) -> LatticeState:
        return single_mode_state(
            self.size,
            self.mode,
            self.c0,
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            degree=self.degree,
        )


@dataclass(frozen=True)
class LocalizationReport:
    """Time-averaged spectrum of a localization run and its packet fit.

    ``average_spectrum`` holds specific energies per bin averaged over
    the second half of the run.  ``sigma`` is the exponential decay
    rate per harmonic index from the least-squares fit of
    log(E_{n mode}/size) against n; a harmonic chain keeps all energy
    in the seeded bin, which leaves too few supported harmonics to fit
    and is reported with ``degenerate`` set.
    """

    experiment: LocalizationExperiment
    average_spectrum: np.ndarray
    sigma: float
    r_squared: float
    width: int
    supported: tuple[int, ...]
    degenerate: bool
    energy_drift: float

    def summary(self) -> str:
        lines = [
            f"size={self.experiment.size} mode={self.experiment.mode} "
            f"mu={self.experiment.mu:.5f} horizon={self.experiment.horizon:.6g}",
            f"packet width: {self.width} of {self.experiment.size // 2} bins",
            f"energy drift: {self.energy_drift:.3e}",
        ]
        if self.degenerate:
            lines.append("decay fit: degenerate (fewer than three supported harmonics)")
        else:
            lines.append(
                f"decay fit: sigma={self.sigma:.4f} r_squared={self.r_squared:.4f} "
                f"over harmonics {list(self.supported)}"
            )
        return "\n".join(lines)


def run_localization(exp: LocalizationExperiment, snapshots: int = 256) -> LocalizationReport:
    """Evolve a single-mode state to t_final / mu^3 and fit the packet.

    The mode spectrum is sampled at ``snapshots`` evenly spaced times
    and averaged over the second half of the run.  The decay fit uses
    the harmonics n * mode up to size/2 that carry more than 1e-14 of
    the averaged total; the packet width counts bins in 1 .. size/2
    holding at least 1e-3 of the peak bin.  Blow-up propagates with the
    absolute time of the failing chunk.
    """
    state = exp.initial_state()
    e0 = state.energy()
    total_steps = max(1, math.ceil(exp.horizon / exp.dt))
    snapshots = max(2, min(snapshots, total_steps))
    bounds = sorted({round(i * total_steps / snapshots) for i in range(1, snapshots + 1)})
    accum = np.zeros(exp.size)
    count = 0
    done = 0
    for bound in bounds:
        if bound > done:
            try:
                state = step(state, exp.dt, steps=bound - done, scheme=exp.scheme)
            except BlowUpError as exc:
                at = done * exp.dt + (exc.time or 0.0)
                raise BlowUpError("chain state became non-finite", time=at) from exc
            done = bound
        if 2 * bound >= total_steps:
            accum += mode_energies(state).specific
            count += 1
    avg = accum / count
    half = exp.size // 2
    total_energy = float(avg.sum())

    ladder = range(1, half // exp.mode + 1)
    supported = [n for n in ladder if avg[n * exp.mode] > 1e-14 * total_energy]
    if len(supported) >= 3:
        x = np.array(supported, dtype=float)
        y = np.log(avg[[n * exp.mode for n in supported]])
        slope, intercept = np.polyfit(x, y, 1)
        fitted = slope * x + intercept
        ss_res = float(np.sum((y - fitted) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        degenerate = ss_tot == 0.0
        sigma = float(-slope)
        r_squared = 0.0 if degenerate else 1.0 - ss_res / ss_tot
    else:
        degenerate = True
        sigma = math.inf
        r_squared = 0.0

    peak = float(avg[1 : half + 1].max())
    width = int(np.count_nonzero(avg[1 : half + 1] >= 1e-3 * peak))
    drift = abs(state.energy() - e0) / abs(e0)
    return LocalizationReport(
        experiment=exp,
        average_spectrum=avg,
        sigma=sigma,
        r_squared=r_squared,
        width=width,
        supported=tuple(supported),
        degenerate=degenerate,
        energy_drift=drift,
    )


@dataclass(frozen=True)
class ComparisonRow:
    """Discrepancy between lattice and normal-form specific energies."""

    mu: float
    size: int
    discrepancy: float
    relative: float


@dataclass(frozen=True)
class ComparisonReport:
    """Lattice-versus-normal-form discrepancies across a mu grid."""

    rows: tuple[ComparisonRow, ...]

    @property
    def monotone(self) -> bool:
        """Whether the discrepancy decreases strictly as mu decreases."""
        ordered = sorted(self.rows, key=lambda row: -row.mu)
        pairs = zip(ordered, ordered[1:])
        return all(a.discrepancy > b.discrepancy for a, b in pairs)

    @property
    def scaling_exponent(self) -> float:
        """Slope of log(discrepancy) against log(mu)."""
        if len(self.rows) < 2:
            return math.nan
        x = np.log([row.mu for row in self.rows])
        y = np.log([max(row.discrepancy, 1e-300) for row in self.rows])
        slope, _ = np.polyfit(x, y, 1)
        return float(slope)

    def summary(self) -> str:
        lines = ["mu        size  max|dE_k|/N   relative"]
        for row in self.rows:
            lines.append(
                f"{row.mu:<9.5f} {row.size:<5d} {row.discrepancy:<13.4e} {row.relative:.4e}"
            )
        lines.append(f"monotone in mu: {self.monotone}")
        if len(self.rows) >= 2:
            lines.append(f"scaling exponent: {self.scaling_exponent:.2f}")
        return "\n".join(lines)


def _pure_single(obs: ObservableExpr, var: str) -> ObservableExpr:
    """Single-integral terms of ``obs`` supported entirely on ``var``."""
    out = ObservableExpr.zero()
    for atoms, coeff in obs:
        if len(atoms) != 1:
            continue
        if {f.var for f in atoms[0]} == {var}:
            out = out + ObservableExpr.from_atom(atoms[0], coeff)
    return out


def _side_rhs(block: ObservableExpr, var: str) -> DensityPolynomial:
    """Right-hand side of the decoupled flow for one Riemann variable.

    The Hamiltonian is the quadratic background plus the var-local
    single-integral part of the leading normal-form block; products of
    integrals only shift frequencies and are dropped from the flow.
    """
    ham = _pure_single(background_k0(), var) + _pure_single(block, var)
    fields = vector_field(ham, PoissonStructure.gardner())
    return fields.get(var, DensityPolynomial.zero())


def _specific_from_rp(r: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Specific mode energies from bond and momentum profiles.

    Uses |rhat_k| = omega_k |qhat_k|, so no division by the near-zero
    long-wave phase factor is needed.
    """
    n = r.size
    rhat = np.abs(np.fft.fft(r)) ** 2
    phat = np.abs(np.fft.fft(p)) ** 2
    return (phat + rhat) / (2.0 * n * n)


def compare_with_normalform(
    exp: LocalizationExperiment,
    result: NormalFormResult,
    mu_grid: tuple[Fraction, ...] = (Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)),
    checkpoints: int = 8,
    spectral_size: int = 64,
    spectral_steps: int = 4096,
) -> ComparisonReport:
    """Compare chain mode energies against the decoupled continuum flows.

    ``result`` must come from the normal-form solver run on the
    continuum Hamiltonian of the same chain with symbolic ``eps`` and
    ``h``; the leading block is evaluated here with eps = mu^4 and
    h = 1/size for each grid point.  For each mu the chain of size
    mode/mu is started from the single-mode datum and integrated to
    t_final / mu^3, while the Riemann fields u = (r + p)/sqrt(2 eps),
    v = (r - p)/sqrt(2 eps) built from the same datum evolve under the
    two one-sided flows in the slow time tau = h t.  The reported
    discrepancy is the maximum over checkpoints and bins of the
    difference in specific energies E_k / size, with ``relative``
    normalizing by the largest lattice bin.
    """
    rhs = {var: _side_rhs(result.z[min(result.z)], var) for var in ("u", "v")}
    rows = []
    for mu in mu_grid:
        frac = Fraction(mu)
        size = Fraction(exp.mode, 1) / frac
        if size.denominator != 1:
            raise ValueError(f"mu {frac} does not divide mode {exp.mode} into a lattice size")
        rows.append(
            _compare_single(exp, rhs, int(size), checkpoints, spectral_size, spectral_steps)
        )
    return ComparisonReport(tuple(rows))


def _compare_single(
    exp: LocalizationExperiment,
    rhs: dict[str, DensityPolynomial],
    size: int,
    checkpoints: int,
    spectral_size: int,
    spectral_steps: int,
) -> ComparisonRow:
    mu = exp.mode / size
    h = 1.0 / size
    sqrt_eps = mu * mu
    params = {
        "alpha": exp.alpha,
        "beta": exp.beta,
        "gamma": exp.gamma,
        "eps": mu**4,
        "h": h,
    }
    state = single_mode_state(
        size,
        exp.mode,
        exp.c0,
        alpha=exp.alpha,
        beta=exp.beta,
        gamma=exp.gamma,
        degree=exp.degree,
    )
    r = state.stretches()
    scale = math.sqrt(2.0) * sqrt_eps
    u0 = PeriodicField((r + state.p) / scale)
    v0 = PeriodicField((r - state.p) / scale)

    t_end = exp.t_final / mu**3
    tau_end = h * t_end
    cadence = max(1, spectral_steps // checkpoints)
    cfg = SpectralSolverConfig(
        size=spectral_size,
        dt=tau_end / (checkpoints * cadence),
        t_end=tau_end,
        scheme="ETDRK4",
        sample_every=cadence,
    )
    traj_u = integrate_flow(rhs["u"], u0, cfg, params)
    traj_v = integrate_flow(rhs["v"], v0, cfg, params)

    discrepancy = 0.0
    peak = 0.0
    steps_done = 0
    for i in range(1, checkpoints + 1):
        target = round(t_end * i / (checkpoints * exp.dt))
        if target > steps_done:
            state = step(state, exp.dt, steps=target - steps_done, scheme=exp.scheme)
            steps_done = target
        lattice_spec = mode_energies(state).specific
        u_i = traj_u.field(i).resampled(size).values
        v_i = traj_v.field(i).resampled(size).values
        r_i = (u_i + v_i) * (scale / 2.0)
        p_i = (u_i - v_i) * (scale / 2.0)
        flow_spec = _specific_from_rp(r_i, p_i)
        discrepancy = max(discrepancy, float(np.max(np.abs(lattice_spec - flow_spec))))
        peak = max(peak, float(np.max(lattice_spec)))
    return ComparisonRow(mu=mu, size=size, discrepancy=discrepancy, relative=discrepancy / peak)
