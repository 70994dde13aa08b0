"""Command-line front end emitting reproducible artifacts.

Four commands cover the pipelines: ``normal-form`` runs the symbolic
solver on a model file, ``simulate`` drives the chain and circle
integrators, ``compare`` measures the chain against the decoupled
normal-form flows over a mu grid, and ``verify`` runs the seeded
invariant suites.  Outputs are CSV/JSON plus gnuplot stubs; every file
carries a header with the package version, the seed, and a hash of the
effective configuration, and reruns with the same configuration are
bit-identical.

Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
3 algebra error, 4 solver blow-up.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

import wavenf
from wavenf import lattice
from wavenf import verify as verify_mod
from wavenf.algebra.numeric import PeriodicField, evaluate_density
from wavenf.algebra.observables import ObservableExpr
from wavenf.errors import AlgebraError, BlowUpError, ParseError
from wavenf.kdv import (
    HierarchyField,
    HierarchyIntegrals,
    SpectralSolverConfig,
    hierarchy_match,
    integrate as integrate_flow,
    single_variable_part,
)
from wavenf.models import (
    FPUContinuumModel,
    GenericModel,
    MechanicalModel,
    load_model,
    to_uv,
)
from wavenf.normalform import normal_form_mechanical, normal_form_order2

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_ALGEBRA = 3
EXIT_BLOWUP = 4


# ---------------------------------------------------------------------------
# artifact plumbing


def _config_payload(args: argparse.Namespace) -> dict[str, str]:
    # The hash names the run configuration; where the artifacts land and
    # how many workers produced them do not change the results.
    skip = {"func", "out", "jobs"}
    return {key: str(value) for key, value in sorted(vars(args).items()) if key not in skip}


def _meta(args: argparse.Namespace) -> dict[str, object]:
    payload = _config_payload(args)
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()
    return {
        "version": wavenf.__version__,
        "seed": getattr(args, "seed", verify_mod.DEFAULT_SEED),
        "config": digest[:12],
    }


def _header_lines(meta: dict[str, object]) -> list[str]:
    return [
        f"# wavenf {meta['version']}",
        f"# seed: {meta['seed']}",
        f"# config: {meta['config']}",
    ]


def _np_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path: Path, meta: dict[str, object], body: dict[str, object]) -> None:
    document = {"meta": meta}
    document.update(body)
    path.write_text(
        json.dumps(document, sort_keys=True, indent=2, default=_np_default) + "\n"
    )


def _write_csv(path: Path, meta: dict[str, object], columns: list[str], rows: list[list]) -> None:
    lines = _header_lines(meta)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_gnuplot(path: Path, meta: dict[str, object], body: list[str]) -> None:
    path.write_text("\n".join(_header_lines(meta) + body) + "\n")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _term_rows(obs: ObservableExpr) -> list[dict[str, str]]:
    rows = []
    for atoms, coeff in obs:
        label = "*".join("O[" + "*".join(str(f) for f in atom) + "]" for atom in atoms)
        rows.append({"term": label, "coefficient": str(coeff)})
    rows.sort(key=lambda row: row["term"])
    return rows


# ---------------------------------------------------------------------------
# normal-form


def _normal_form_blocks(model) -> dict[str, ObservableExpr]:
    """Solve the model's normal form and label the blocks as displayed."""
    if isinstance(model, GenericModel):
        result = normal_form_order2(to_uv(model))
        return {"Z1": result.z[1], "Z2": result.z[2]}
    graded = to_uv(model)
    if graded.max_order() <= 1:
        result = normal_form_order2(graded)
        return {"Z1": result.z[1], "Z2": result.z[2]}
    result = normal_form_mechanical(graded.order(1), graded.order(2))
    if isinstance(model, MechanicalModel):
        return {"Z2": result.z[2], "Z4": result.z[4]}
    return {"Z1": result.z[2], "Z2": result.z[4]}


def cmd_normal_form(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    blocks = _normal_form_blocks(model)
    meta = _meta(args)
    out = _out_dir(args)

    lines = []
    for name, block in blocks.items():
        lines.append(f"{name} = {block}")
    (out / "normal_form.txt").write_text(
        "\n".join(_header_lines(meta) + lines) + "\n"
    )
    body: dict[str, object] = {
        "model": str(args.model),
        "blocks": {name: str(block) for name, block in blocks.items()},
        "coefficients": {name: _term_rows(block) for name, block in blocks.items()},
    }

    if args.check_hierarchy:
        leading, second = list(blocks.values())
        report = hierarchy_match(
            single_variable_part(leading, "u"), single_variable_part(second, "u")
        )
        body["hierarchy"] = {
            "gamma": str(report.gamma),
            "is_member": report.is_member,
            "residual": str(report.residual),
            "coefficients": {k: str(v) for k, v in sorted(report.coefficients.items())},
            "frequency_shifts": str(report.frequency_shifts),
            "nonlinear_ratio_consistent": report.nonlinear_ratio_consistent,
        }
        (out / "hierarchy_match.txt").write_text(
            "\n".join(_header_lines(meta) + [str(report)]) + "\n"
        )
        print(f"hierarchy member: {report.is_member}")

    _write_json(out / "normal_form.json", meta, body)
    for line in lines:
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate_fpu(args: argparse.Namespace) -> int:
    exp = lattice.LocalizationExperiment(
        size=args.N,
        mode=args.k0,
        c0=args.c0,
        t_final=args.T,
        dt=args.dt,
        scheme=args.scheme,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        degree=args.degree,
    )
    meta = _meta(args)
    out = _out_dir(args)
    try:
        report = lattice.run_localization(exp)
    except BlowUpError as exc:
        _write_json(
            out / "blowup.json",
            meta,
            {"error": str(exc), "time": exc.time},
        )
        raise

    half = exp.size // 2
    rows = [
        [k, k / exp.size, float(report.average_spectrum[k])] for k in range(half + 1)
    ]
    _write_csv(out / "spectrum.csv", meta, ["k", "kappa", "specific_energy"], rows)

    ladder = [float(report.average_spectrum[n * exp.mode]) for n in report.supported]
    decay_monotone = all(a > b for a, b in zip(ladder, ladder[1:]))
    _write_json(
        out / "localization.json",
        meta,
        {
            "size": exp.size,
            "mode": exp.mode,
            "mu": exp.mu,
            "horizon": exp.horizon,
            "sigma": report.sigma,
            "r_squared": report.r_squared,
            "width": report.width,
            "supported": list(report.supported),
            "degenerate": report.degenerate,
            "energy_drift": report.energy_drift,
            "decay_monotone": decay_monotone,
        },
    )
    _write_gnuplot(
        out / "spectrum.gp",
        meta,
        [
            "set logscale y",
            'set xlabel "mode index k"',
            'set ylabel "time-averaged specific energy"',
            'plot "spectrum.csv" using 1:3 with linespoints title "packet"',
        ],
    )
    print(report.summary())
    print(f"monotone harmonic decay: {decay_monotone}")
    return EXIT_OK


def cmd_simulate_kdv(args: argparse.Namespace) -> int:
    gamma = Fraction(str(args.gamma))
    rhs = HierarchyField(gamma).density()
    w0 = PeriodicField.from_harmonics({1: 0.25, 2: 0.06}, {1: 0.05}, args.N)
    cfg = SpectralSolverConfig(
        size=args.N, dt=args.dt, t_end=args.T, scheme=args.scheme
    )
    meta = _meta(args)
    out = _out_dir(args)
    try:
        traj = integrate_flow(rhs, w0, cfg)
    except BlowUpError as exc:
        _write_json(out / "blowup.json", meta, {"error": str(exc), "time": exc.time})
        raise

    tracked = list(range(1, 9))
    rows = []
    for i, t in enumerate(traj.times):
        spec = np.abs(np.fft.rfft(traj.states[i]) / cfg.size)
        rows.append([float(t)] + [float(spec[k]) for k in tracked])
    _write_csv(
        out / "modes.csv",
        meta,
        ["time"] + [f"mag_{k}" for k in tracked],
        rows,
    )

    first = np.abs(np.fft.rfft(traj.states[0]) / cfg.size)
    drift = 0.0
    for i in range(len(traj.times)):
        spec = np.abs(np.fft.rfft(traj.states[i]) / cfg.size)
        drift = max(drift, float(np.max(np.abs(spec[tracked] - first[tracked]))))

    integrals = HierarchyIntegrals(gamma)
    conservation = {}
    for name, dens in (("I0", integrals.i0), ("I1", integrals.i1), ("I3", integrals.i3)):
        before = evaluate_density(dens, {"w": traj.field(0)})
        after = evaluate_density(dens, {"w": traj.final})
        conservation[name] = abs(after - before) / max(abs(before), 1e-12)
    _write_json(
        out / "kdv_summary.json",
        meta,
        {
            "gamma": str(gamma),
            "t_end": cfg.t_end,
            "mode_magnitude_drift": drift,
            "conservation_drift": conservation,
        },
    )
    _write_gnuplot(
        out / "modes.gp",
        meta,
        [
            'set xlabel "time"',
            'set ylabel "mode magnitude"',
            "plot " + ", ".join(f'"modes.csv" using 1:{i + 2} with lines title "k={k}"' for i, k in enumerate(tracked[:4])),
        ],
    )
    print(f"mode magnitude drift: {drift:.3e}")
    for name, value in conservation.items():
        print(f"{name} drift: {value:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare


def _numeric(value, name: str) -> float:
    try:
        return value.evaluate({})
    except AlgebraError as exc:
        raise AlgebraError(f"compare needs a numeric {name} in the model file") from exc


def _compare_worker(payload) -> lattice.ComparisonRow:
    exp_kwargs, rhs, size, checkpoints, spectral_size, spectral_steps = payload
    exp = lattice.LocalizationExperiment(**exp_kwargs)
    return lattice._compare_single(exp, rhs, size, checkpoints, spectral_size, spectral_steps)


def cmd_compare(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if not isinstance(model, FPUContinuumModel):
        raise ParseError("compare expects a chain model file ([fpu] section)")
    try:
        grid = tuple(Fraction(part) for part in args.mu_grid.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad --mu-grid {args.mu_grid!r}: {exc}") from exc

    symbolic = FPUContinuumModel(
        alpha=model.alpha, beta=model.beta, p=model.p, gamma=model.gamma
    )
    graded = to_uv(symbolic)
    if graded.max_order() <= 1:
        nf = normal_form_order2(graded)
    else:
        nf = normal_form_mechanical(graded.order(1), graded.order(2))

    alpha = _numeric(model.alpha, "alpha")
    beta = _numeric(model.beta, "beta")
    exp_kwargs = dict(
        size=int(Fraction(args.k0, 1) / max(grid)),
        mode=args.k0,
        c0=args.c0,
        t_final=args.T,
        dt=args.dt,
        alpha=alpha,
        beta=beta,
    )
    if model.p > 4:
        if model.gamma is None:
            raise AlgebraError("generalized chain (p >= 5) needs a gamma value")
        exp_kwargs.update(
            alpha=0.0,
            beta=0.0,
            gamma=_numeric(model.gamma, "gamma"),
            degree=model.p,
        )
    exp = lattice.LocalizationExperiment(**exp_kwargs)

    if args.jobs > 1:
        rhs = {var: lattice._side_rhs(nf.z[min(nf.z)], var) for var in ("u", "v")}
        payloads = []
        for mu in grid:
            size = Fraction(args.k0, 1) / mu
            if size.denominator != 1:
                raise ParseError(f"mu {mu} does not divide k0 {args.k0} into a lattice size")
            payloads.append((exp_kwargs, rhs, int(size), 8, 64, 4096))
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = tuple(pool.map(_compare_worker, payloads))
        report = lattice.ComparisonReport(rows)
    else:
        report = lattice.compare_with_normalform(exp, nf, mu_grid=grid)

    meta = _meta(args)
    out = _out_dir(args)
    rows = [[row.mu, row.size, row.discrepancy, row.relative] for row in report.rows]
    _write_csv(out / "compare.csv", meta, ["mu", "size", "discrepancy", "relative"], rows)
    _write_json(
        out / "compare.json",
        meta,
        {
            "rows": [
                {
                    "mu": row.mu,
                    "size": row.size,
                    "discrepancy": row.discrepancy,
                    "relative": row.relative,
                }
                for row in report.rows
            ],
            "monotone": report.monotone,
            "scaling_exponent": report.scaling_exponent,
        },
    )
    _write_gnuplot(
        out / "compare.gp",
        meta,
        [
            "set logscale xy",
            'set xlabel "mu"',
            'set ylabel "max specific-energy discrepancy"',
            'plot "compare.csv" using 1:3 with linespoints title "lattice vs normal form"',
        ],
    )
    print(report.summary())
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args: argparse.Namespace) -> int:
    names = args.suite.split(",") if args.suite else None
    try:
        results = verify_mod.run_suites(names, seed=args.seed, draws=args.draws)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    for result in results:
        print(result.line())
    failures = [r for r in results if not r.passed]
    if args.out is not None:
        meta = _meta(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "verify.json",
            meta,
            {
                "results": [
                    {
                        "suite": r.suite,
                        "name": r.name,
                        "passed": r.passed,
                        "detail": r.detail,
                    }
                    for r in results
                ],
                "failures": len(failures),
            },
        )
    if failures:
        print(f"{len(failures)} of {len(results)} checks failed")
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavenf",
        description="Normal forms and long-wave dynamics of oscillator chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    nf = sub.add_parser("normal-form", help="solve a model's normal form")
    nf.add_argument("--model", required=True, help="model TOML file")
    nf.add_argument("--check-hierarchy", action="store_true", help="match the result against the integrable hierarchy")
    nf.add_argument("--out", default=".", help="output directory")
    nf.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    nf.set_defaults(func=cmd_normal_form)

    sim = sub.add_parser("simulate", help="run a chain or circle simulation")
    target = sim.add_subparsers(dest="target", required=True)

    fpu = target.add_parser("fpu", help="single-mode chain localization run")
    fpu.add_argument("--N", type=int, default=32, help="chain size")
    fpu.add_argument("--k0", type=int, default=1, help="seeded mode")
    fpu.add_argument("--alpha", type=float, default=0.25)
    fpu.add_argument("--beta", type=float, default=0.0)
    fpu.add_argument("--gamma", type=float, default=0.0, help="degree-tail strength")
    fpu.add_argument("--degree", type=int, default=0, help="potential tail degree (0 = none)")
    fpu.add_argument("--c0", type=float, default=1.0, help="specific energy scale c0 mu^4")
    fpu.add_argument("--T", type=float, default=1.0, help="t_final; runs to T/mu^3")
    fpu.add_argument("--dt", type=float, default=0.1)
    fpu.add_argument("--scheme", choices=("verlet", "yoshida4"), default="yoshida4")
    fpu.add_argument("--out", default=".")
    fpu.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    fpu.set_defaults(func=cmd_simulate_fpu)

    kdv = target.add_parser("kdv", help="third-order hierarchy flow on the circle")
    kdv.add_argument("--gamma", type=str, default="6", help="nonlinearity coefficient (rational)")
    kdv.add_argument("--N", type=int, default=256, help="grid size")
    kdv.add_argument("--T", type=float, default=1.0)
    kdv.add_argument("--dt", type=float, default=1e-3)
    kdv.add_argument("--scheme", choices=("ETDRK4", "IFRK4"), default="ETDRK4")
    kdv.add_argument("--out", default=".")
    kdv.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    kdv.set_defaults(func=cmd_simulate_kdv)

    cmp_ = sub.add_parser("compare", help="chain versus decoupled normal-form flows")
    cmp_.add_argument("--model", required=True, help="chain model TOML file")
    cmp_.add_argument("--mu-grid", default="1/8,1/16,1/32", help="comma-separated mu values")
    cmp_.add_argument("--k0", type=int, default=1)
    cmp_.add_argument("--c0", type=float, default=1.0)
    cmp_.add_argument("--T", type=float, default=1.0, help="matched t_final")
    cmp_.add_argument("--dt", type=float, default=0.1)
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel workers for the mu sweep")
    cmp_.add_argument("--out", default=".")
    cmp_.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    cmp_.set_defaults(func=cmd_compare)

    ver = sub.add_parser("verify", help="run the seeded invariant suites")
    ver.add_argument("--suite", default=None, help="comma-separated suite names (default: all)")
    ver.add_argument("--draws", type=int, default=verify_mod.DEFAULT_DRAWS)
    ver.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    ver.add_argument("--out", default=None, help="optionally write verify.json here")
    ver.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BlowUpError as exc:
        at = "" if exc.time is None else f" at t = {exc.time:.6g}"
        print(f"blow-up{at}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except AlgebraError as exc:
        print(f"algebra error: {exc}", file=sys.stderr)
        return EXIT_ALGEBRA


if __name__ == "__main__":
    sys.exit(main())
