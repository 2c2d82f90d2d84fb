"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 calibration bracket error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import DEFAULT_BRACKET, BracketError, fit_power_law, optimize_tau
from .ensemble import (
    NOISE_V0_GRID,
    NoiseSweepConfig,
    fit_delta_alpha_slope,
    run_noise_sweep,
    run_tilt_sweep,
    write_delta_alpha_csv,
    write_noise_csv,
    write_tilt_csv,
)
from .geomcoeff import ConvergenceError, geometric_coefficients, write_alpha_csv
from .potentials import PotentialSpec, power_bowl_spec
from .reference import TAU, full_alpha
from .spectral import SineBasis, SolverSettings, default_grid, solve, write_spectrum_csv
from .spinchain import (
    find_t_out,
    fidelity_curve,
    from_alpha,
    optimal_time,
    semicircle_couplings,
    write_curve_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_BRACKET = 0, 2, 3, 4
THREADS_ENV = "ATOMCHAIN_THREADS"
FAST_M = 50


class ConfigError(ValueError):
    pass


def _settings(args, N):
    if args.n_basis is not None:
        return SolverSettings(n_basis=args.n_basis)
    if args.fast:
        return SolverSettings(n_basis=max(120, 8 * N), panels_per_basis=2)
    return SolverSettings()


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    try:
        return int(env) if env else 1
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None


def _config_record(args) -> dict:
    skip = {"func", "out_dir", "threads"}  # execution details, not results
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _provenance(args, **extra) -> dict:
    cfg = _config_record(args)
    canon = json.dumps(cfg, sort_keys=True, default=str)
    prov = {"config": cfg, "config_hash": hashlib.sha256(canon.encode()).hexdigest()[:16],
            "version": __version__}
    prov.update(extra)
    return prov


def _header_lines(prov) -> list:
    return [f"atomchain {prov['version']}", f"provenance: {json.dumps(prov, sort_keys=True, default=str)}"]


def _out(args, name) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _load_potential(args) -> PotentialSpec:
    if getattr(args, "potential", None):
        path = Path(args.potential)
        if not path.is_file():
            raise ConfigError(f"potential file not found: {path}")
        try:
            return PotentialSpec.from_json(path.read_text())
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"invalid potential document {path}: {exc}") from None
    if getattr(args, "tau", None) is not None:
        return power_bowl_spec(args.tau)
    raise ConfigError("give either --potential FILE or --tau")


def _tau_for(args, N):
    if args.tau is not None:
        return args.tau
    if N in TAU:
        return TAU[N]
    raise ConfigError(f"no stored calibrated tau for N={N}; pass --tau")


def _check_n(N, minimum=2):
    if N < minimum:
        raise ConfigError(f"--n must be >= {minimum}, got {N}")


# -- subcommands -----------------------------------------------------------


def cmd_spectrum(args):
    spec = _load_potential(args)
    _check_n(args.n, 1)
    settings = _settings(args, args.n)
    basis = SineBasis(spec.box_length, settings.basis_size(args.n))
    sol = solve(basis, spec, args.n, default_grid(spec.box_length, basis.n_basis, settings), settings)
    prov = _provenance(args, spec_hash=spec.digest(), settings=settings.as_dict(args.n))
    write_spectrum_csv(sol, _out(args, "spectrum.csv"), args.samples, _header_lines(prov))
    for n, E in enumerate(sol.energies, start=1):
        print(f"{n:4d}  {E:.10g}")
    return EXIT_OK


def cmd_coeffs(args):
    spec = _load_potential(args)
    _check_n(args.n)
    settings = _settings(args, args.n)
    coeffs = geometric_coefficients(spec, args.n, settings, check=not args.no_check)
    prov = _provenance(args, spec_hash=spec.digest(), settings=settings.as_dict(args.n))
    write_alpha_csv(coeffs, _out(args, "alpha.csv"), _header_lines(prov))
    _write_json(_out(args, "alpha.json"), dict(coeffs.to_dict(), run=prov))
    for k, a in enumerate(coeffs.alpha, start=1):
        print(f"{k:4d}  {a:.7f}")
    return EXIT_OK


def _calibration_row(cal):
    half = [float(a) for a in cal.alpha.alpha[: cal.N // 2]]
    return {"N": cal.N, "tau": cal.tau, "beta": cal.fit.beta, "f": cal.fit.f, "A": cal.fit.A,
            "iterations": cal.iterations, "alpha_half": half}


def _write_table(args, rows, stem, prov):
    width = max(len(r["alpha_half"]) for r in rows)
    with open(_out(args, f"{stem}.csv"), "w") as fh:
        for line in _header_lines(prov):
            fh.write(f"# {line}\n")
        cols = ["N", "tau", "beta", "f"] + [f"alpha_{k}" for k in range(1, width + 1)]
        fh.write(",".join(cols) + "\n")
        for r in rows:
            vals = [str(r["N"]), repr(r["tau"]), repr(r["beta"]), repr(r["f"])]
            vals += [f"{a:.7f}" for a in r["alpha_half"]]
            fh.write(",".join(vals + [""] * (width - len(r["alpha_half"]))) + "\n")
    _write_json(_out(args, f"{stem}.json"), {"rows": rows, "provenance": prov})


def _n_values(args):
    if args.n_range:
        lo, hi = args.n_range
        if lo > hi:
            raise ConfigError("--n-range needs LO <= HI")
        ns = list(range(lo, hi + 1))
    else:
        ns = [args.n]
    for N in ns:
        _check_n(N, 3)
    return ns


def cmd_calibrate(args):
    ns = _n_values(args)
    rows = []
    for N in ns:
        cal = optimize_tau(N, tuple(args.bracket), args.tol, _settings(args, N))
        rows.append(_calibration_row(cal))
        print(f"N={N:3d}  tau*={cal.tau:.6f}  beta={cal.fit.beta:.6f}  f={cal.fit.f:.3g}")
    _write_table(args, rows, "calibration", _provenance(args))
    return EXIT_OK


def cmd_table(args):
    ns = _n_values(args)
    rows = []
    for N in ns:
        if N not in TAU:
            raise ConfigError(f"no stored exponent for N={N}")
        coeffs = geometric_coefficients(power_bowl_spec(TAU[N]), N, _settings(args, N), check=not args.no_check)
        fit = fit_power_law(coeffs)
        ref = full_alpha(N)
        dev = float(np.max(np.abs(coeffs.alpha / ref - 1)))
        rows.append({"N": N, "tau": TAU[N], "beta": fit.beta, "f": fit.f, "A": fit.A,
                     "alpha_half": [float(a) for a in coeffs.alpha[: N // 2]],
                     "max_rel_dev_from_stored": dev})
        print(f"N={N:3d}  tau={TAU[N]:.6f}  max rel. deviation from stored alpha {dev:.2e}")
    _write_table(args, rows, "table", _provenance(args))
    return EXIT_OK


def _transfer_model(args):
    if args.semicircle:
        return semicircle_couplings(args.semicircle, args.lam), {"semicircle": args.semicircle}
    if args.alpha_json:
        path = Path(args.alpha_json)
        if not path.is_file():
            raise ConfigError(f"alpha file not found: {path}")
        data = json.loads(path.read_text())
        return from_alpha(np.asarray(data["alpha"], dtype=float), args.g, args.kappa), {"alpha_file": str(path)}
    if args.n is None:
        raise ConfigError("give --semicircle N, --alpha-json FILE, or --n with --tau/--potential")
    _check_n(args.n)
    if args.potential is None and args.tau is None:
        args.tau = _tau_for(args, args.n)
    spec = _load_potential(args)
    coeffs = geometric_coefficients(spec, args.n, _settings(args, args.n), check=False)
    return from_alpha(coeffs, args.g, args.kappa), {"spec_hash": spec.digest()}


def cmd_transfer(args):
    model, source = _transfer_model(args)
    summary = find_t_out(model)
    t0 = optimal_time(model)
    times = np.linspace(0.0, args.t_max * t0, args.n_times)
    curve = fidelity_curve(model, times)
    prov = _provenance(args, **source)
    write_curve_csv(curve, _out(args, "fidelity.csv"), _header_lines(prov))
    _write_json(_out(args, "transfer.json"), dict(summary.to_dict(), N=model.N, provenance=prov))
    print(f"N={model.N}  t0={summary.t0:.6g}  F(t0)={summary.F_t0:.10f}  "
          f"t_out={summary.t_out:.6g}  F(t_out)={summary.F_t_out:.10f}")
    return EXIT_OK


def cmd_noise(args):
    _check_n(args.n, 3)
    tau = _tau_for(args, args.n)
    M = args.m if args.m is not None else (FAST_M if args.fast else 200)
    cfg = NoiseSweepConfig(args.n, tau, tuple(args.v0), M, args.seed, _settings(args, args.n))
    stats = run_noise_sweep(cfg, workers=_threads(args))
    prov = _provenance(args, tau=tau, M=M)
    hdr = _header_lines(prov)
    write_noise_csv(stats, _out(args, "noise.csv"), hdr)
    write_delta_alpha_csv(stats, _out(args, "delta_alpha.csv"), hdr)
    report = stats.report()
    try:
        slope = fit_delta_alpha_slope(stats)
        report["slope"] = {"slope": slope.slope, "uncertainty": slope.slope_uncertainty}
    except ValueError as exc:
        report["slope"] = {"error": str(exc)}
    report["provenance"] = prov
    _write_json(_out(args, "noise.json"), report)
    for r in stats.rows:
        print(f"V0={r.V0:<8g} mean F={r.mean_F:.6f}  std F={r.std_F:.6f}  failed={r.n_failed}")
    if "slope" in report["slope"]:
        print(f"delta-alpha slope = {report['slope']['slope']:.5f} +- {report['slope']['uncertainty']:.5f}")
    return EXIT_OK


def cmd_tilt(args):
    _check_n(args.n, 3)
    tau = _tau_for(args, args.n)
    points = run_tilt_sweep(args.n, tau, args.v0, _settings(args, args.n), workers=_threads(args))
    prov = _provenance(args, tau=tau)
    write_tilt_csv(points, _out(args, "tilt.csv"), _header_lines(prov))
    _write_json(_out(args, "tilt.json"), {"points": [vars(p) for p in points], "provenance": prov})
    for p in points:
        print(f"V0={p.V0:<8g} F(t_out)={p.F_t_out:.6f}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--out-dir", default=".", help="directory for output files")
    common.add_argument("--fast", action="store_true", help="coarser settings for quick runs")
    common.add_argument("--n-basis", type=_positive_int, help="override the sine-basis size")
    common.add_argument("--threads", type=_positive_int,
                        help=f"worker processes (default ${THREADS_ENV} or 1)")

    p = argparse.ArgumentParser(prog="atomchain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def potential_opts(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--potential", help="potential JSON document")
        g.add_argument("--tau", type=float, help="bowl exponent (amplitude 100, L = 100)")

    sp = sub.add_parser("spectrum", parents=[common], help="single-particle energies")
    potential_opts(sp)
    sp.add_argument("--n", type=_positive_int, required=True, help="number of states")
    sp.add_argument("--samples", type=int, default=0, help="also sample wavefunctions on this many points")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("coeffs", parents=[common], help="geometric coefficients")
    potential_opts(sp)
    sp.add_argument("--n", type=_positive_int, required=True, help="number of particles")
    sp.add_argument("--no-check", action="store_true", help="skip the doubling convergence check")
    sp.set_defaults(func=cmd_coeffs)

    for name, func, helptext in (("calibrate", cmd_calibrate, "optimize the bowl exponent"),
                                 ("table", cmd_table, "coefficients at the stored exponents")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--n", type=int)
        g.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"))
        if name == "calibrate":
            sp.add_argument("--bracket", type=float, nargs=2, default=list(DEFAULT_BRACKET),
                            metavar=("LO", "HI"))
            sp.add_argument("--tol", type=float, default=1e-4, help="tolerance on |beta - 1/2|")
        else:
            sp.add_argument("--no-check", action="store_true")
        sp.set_defaults(func=func)

    sp = sub.add_parser("transfer", parents=[common], help="transfer fidelity")
    potential_opts(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--semicircle", type=int, metavar="N", help="ideal couplings for N sites")
    sp.add_argument("--lam", type=float, default=1.0, help="semicircle coupling scale")
    sp.add_argument("--alpha-json", help="alpha.json written by 'coeffs'")
    sp.add_argument("--g", type=float, default=1.0)
    sp.add_argument("--kappa", type=float, default=2.0)
    sp.add_argument("--t-max", type=float, default=1.5, help="curve end time in units of t0")
    sp.add_argument("--n-times", type=_positive_int, default=601)
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("noise", parents=[common], help="quasi-periodic noise ensemble")
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--tau", type=float, help="defaults to the stored calibrated value")
    sp.add_argument("--v0", type=float, nargs="+", default=list(NOISE_V0_GRID))
    sp.add_argument("--m", type=_positive_int, help="realizations per V0 (200, or 50 with --fast)")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_noise)

    sp = sub.add_parser("tilt", parents=[common], help="tilted-potential sweep")
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--v0", type=float, nargs="+",
                    default=[0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05])
    sp.set_defaults(func=cmd_tilt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
