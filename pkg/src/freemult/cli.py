"""
Command-line interface.

Subcommands
-----------
convolve    density and atoms of μ⊠ν as ``x,density`` CSV
stransform  T and S on a u-grid as ``u,T_re,T_im,S_re,S_im,status`` CSV
power       ⊞, ⊎ or ⊠ powers of a measure as density CSV
stable      ``stable density`` CSV or ``stable identity`` report
twopoint    closed-form densities of the two-atom models
rmt         Monte Carlo spectra and KS distances
verify      named identity checks

Every flag may also be set in a config file given with ``--config``:
one section per subcommand, ``key = value`` lines with the flag name
(dashes or underscores). Flags on the command line win.

Exit codes are 0 on success, 1 on invalid input and 2 when the share of
non-converged solves exceeds ``--max-fail`` or an identity check fails.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from .measures import MeasureError, TransformError, parse_measure, stieltjes_invert_density
from .tables import TransformTable, format_real, table_to_csv, write_atomic

__all__ = ["main", "build_parser", "emit_csv", "EXIT_OK", "EXIT_INPUT", "EXIT_NUMERIC"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    """Invalid command line or configuration."""


class NumericFailure(Exception):
    """Too many solves failed to converge."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for numeric failure here
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def emit_csv(table: TransformTable, path: str | None, extra: dict | None = None) -> None:
    """Write a table as CSV to `path`, or to stdout for None or ``-``."""
    text = table_to_csv(table, extra)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _report(args, text: str) -> None:
    # keep stdout clean when it carries CSV
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    print(text, file=stream)


def _check_failures(fraction: float, limit: float, what: str) -> None:
    if fraction > limit:
        raise NumericFailure(f"{what}: {fraction:.2%} of solves did not converge "
                             f"(limit {limit:.2%})")


def _grid(args) -> np.ndarray:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if not args.xmin < args.xmax:
        raise UsageError("--xmin must be smaller than --xmax")
    return np.linspace(args.xmin, args.xmax, args.n)


def _positive(value: float, name: str) -> None:
    if not value > 0:
        raise UsageError(f"{name} must be positive")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_convolve(args) -> int:
    from .subordination import ConvolveOptions, convolve

    mu, nu = parse_measure(args.mu), parse_measure(args.nu)
    _positive(args.tol, "--tol")
    opts = ConvolveOptions(tol=args.tol, exclusion_radius=args.exclusion_radius,
                           origin_exclusion=args.origin_exclusion)
    result = convolve(mu, nu, _grid(args), opts)
    emit_csv(result.density_table, args.out)
    lines = [f"{{position: {format_real(p)}, mass: {format_real(m)}}}"
             for p, m in result.atoms]
    for x, singular in result.diagnostics["edges"]:
        lines.append(f"edge {format_real(x)} {'singular' if singular else 'regular'}")
    lines.append(f"total mass {result.total_mass():.6f}")
    _report(args, "\n".join(lines))
    _check_failures(result.diagnostics["not_converged_fraction"], args.max_fail, "convolve")
    return EXIT_OK


def _cmd_stransform(args) -> int:
    from .stransform import classify, default_u_grid, samples_to_table, t_transform

    mu = parse_measure(args.measure)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if not 0 < args.margin < 0.5:
        raise UsageError("--margin must lie in (0, 0.5)")
    samples = t_transform(mu, default_u_grid(args.n, args.margin), args.tol)
    table, extra = samples_to_table(samples, mu.descriptor)
    emit_csv(table, args.out, extra)
    if args.classify:
        _report(args, f"class {classify(mu)}")
    failed = sum(s.status == "not_converged" for s in samples) / len(samples)
    _check_failures(failed, args.max_fail, "stransform")
    return EXIT_OK


def _cmd_power(args) -> int:
    from .powers import boolean_power, free_additive_power, multiplicative_power_positive

    mu = parse_measure(args.measure)
    makers = {"boxplus": free_additive_power, "uplus": boolean_power,
              "boxtimes": multiplicative_power_positive}
    power = makers[args.kind](mu, args.t)
    x = _grid(args)
    table = stieltjes_invert_density(power.cauchy, x, descriptor=power.descriptor)
    emit_csv(table, args.out)
    lines = [f"{{position: {format_real(p)}, mass: {format_real(m)}}}"
             for p, m in power.atoms() if m > 0]
    _report(args, "\n".join(lines) if lines else "no atoms")
    bad = ~np.isfinite(table.metadata["raw"])
    _check_failures(float(bad.mean()), args.max_fail, "power")
    return EXIT_OK


def _cmd_stable(args) -> int:
    from .stable import boolean_stable_density, free_stable_density, levy_density

    if args.mode == "identity":
        return _run_identities(args)
    if args.alpha is None or args.rho is None:
        raise UsageError("stable density needs --alpha and --rho")
    x = _grid(args)
    if args.family == "free":
        table = free_stable_density(args.alpha, args.rho, x)
    else:
        fn = boolean_stable_density if args.family == "boolean" else levy_density
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.nan_to_num(fn(args.alpha, args.rho, x), nan=0.0, posinf=0.0)
        table = TransformTable("density", x, vals,
                               f"{args.family} alpha={args.alpha} rho={args.rho}")
    emit_csv(table, args.out)
    return EXIT_OK


def _run_identities(args) -> int:
    from .identities import IDENTITIES, run_identity

    names = sorted(IDENTITIES) if args.identity == "all" else [args.identity]
    params = {k: getattr(args, k, None) for k in ("alpha", "beta", "rho", "t", "c")}
    failed = False
    for name in names:
        try:
            reports = run_identity(name, **params)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        for rep in reports:
            print(rep.line())
            failed |= not rep.passed
    return EXIT_NUMERIC if failed else EXIT_OK


def _cmd_twopoint(args) -> int:
    from .twopoint import FIGURE1, FIGURE2, closed_form_density

    pair = {"fig1": FIGURE1, "fig2": FIGURE2}[args.pair]
    x = _grid(args)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = closed_form_density(pair, x, args.eps)
    dens = np.where(np.isfinite(dens) & (dens > 0), dens, 0.0)
    emit_csv(TransformTable("density", x, dens, f"two-point {args.pair}"), args.out)
    _report(args, "\n".join(f"{{position: {format_real(p)}, mass: {format_real(m)}}}"
                            for p, m in pair.atoms()))
    return EXIT_OK


def _seed_path(out: str, seed: int) -> str:
    stem, ext = os.path.splitext(out)
    return f"{stem}_seed{seed}{ext or '.csv'}"


def _cmd_rmt(args) -> int:
    from .measures import Atomic
    from .rmt import ks_distances, model_pair, run_seeds
    from .subordination import ConvolveOptions, convolve

    if args.model == "custom":
        if not (args.mu and args.nu):
            raise UsageError("--model custom needs --mu and --nu")
        mu, nu = parse_measure(args.mu), parse_measure(args.nu)
        if not (isinstance(mu, Atomic) and isinstance(nu, Atomic)):
            raise UsageError("rmt needs atomic measures")
    else:
        mu, nu = model_pair(args.model)
    if args.n < 1 or args.seeds < 1:
        raise UsageError("--n and --seeds must be at least 1")
    seeds = list(range(args.seed, args.seed + args.seeds))
    samples = run_seeds(mu, nu, args.n, seeds, args.threads)

    reach = 1.1 * np.max(np.abs(mu.positions)) * np.max(nu.positions) + 0.5
    pred = convolve(mu, nu, np.linspace(-reach, reach, args.grid_n),
                    ConvolveOptions(exclusion_radius=args.exclusion_radius))
    ks = ks_distances(samples, pred)

    rows = ["n,seed,ks"] + [f"{args.n},{s.seed},{format_real(k)}" for s, k in zip(samples, ks)]
    summary = "\n".join(rows) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(summary)
    else:
        write_atomic(args.out, summary)
        for s in samples:
            text = "eigenvalue\n" + "".join(f"{format_real(v)}\n" for v in s.eigenvalues)
            write_atomic(_seed_path(args.out, s.seed), text)
    _report(args, f"mean ks {ks.mean():.6f} over {len(seeds)} seeds")
    _check_failures(pred.diagnostics["not_converged_fraction"], args.max_fail, "rmt")
    return EXIT_OK


def _cmd_verify(args) -> int:
    return _run_identities(args)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common(p, out=True):
    p.add_argument("--config", help="config file with one section per subcommand")
    p.add_argument("--max-fail", type=float, default=0.0,
                   help="tolerated fraction of non-converged solves (default 0)")
    if out:
        p.add_argument("--out", help="output CSV path (default stdout)")


def _grid_args(p, xmin=-10.0, xmax=10.0, n=2000):
    p.add_argument("--xmin", type=float, default=xmin)
    p.add_argument("--xmax", type=float, default=xmax)
    p.add_argument("--n", type=int, default=n, help="number of grid points")


def _identity_args(p, required=True):
    p.add_argument("--identity", required=required, default=None if required else "all",
                   help="identity name or 'all'")
    for name in ("alpha", "beta", "rho", "t", "c"):
        p.add_argument(f"--{name}", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freemult", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("convolve", help="density and atoms of mu [x] nu")
    _common(p)
    p.add_argument("--mu", required=True, help="measure literal on the real line")
    p.add_argument("--nu", required=True, help="measure literal on [0, inf)")
    _grid_args(p)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--exclusion-radius", type=float, default=0.05)
    p.add_argument("--origin-exclusion", type=float, default=None)
    p.set_defaults(func=_cmd_convolve)

    p = sub.add_parser("stransform", help="T- and S-transform on (-1, 0)")
    _common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--classify", action="store_true", help="also report the ray class")
    p.set_defaults(func=_cmd_stransform)

    p = sub.add_parser("power", help="free, Boolean or multiplicative power")
    _common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--kind", choices=["boxplus", "uplus", "boxtimes"], required=True)
    p.add_argument("--t", type=float, required=True)
    _grid_args(p, -5.0, 5.0, 1000)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("stable", help="stable densities and identities")
    p.add_argument("mode", choices=["density", "identity"])
    _common(p)
    p.add_argument("--family", choices=["free", "boolean", "levy"], default="free")
    _grid_args(p, -5.0, 5.0, 1000)
    _identity_args(p, required=False)
    p.set_defaults(func=_cmd_stable)

    p = sub.add_parser("twopoint", help="closed-form two-atom densities")
    _common(p)
    p.add_argument("--pair", choices=["fig1", "fig2"], default="fig1")
    p.add_argument("--eps", type=float, default=0.0, help="height above the axis")
    _grid_args(p)
    p.set_defaults(func=_cmd_twopoint)

    p = sub.add_parser("rmt", help="Monte Carlo spectra against the predicted law")
    _common(p)
    p.add_argument("--model", choices=["fig1", "fig2", "custom"], default="fig1")
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--n", type=int, default=512, help="matrix size")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default from FREEMULT_THREADS)")
    p.add_argument("--grid-n", type=int, default=2000)
    p.add_argument("--exclusion-radius", type=float, default=0.05)
    p.set_defaults(func=_cmd_rmt)

    p = sub.add_parser("verify", help="run a named identity check")
    _common(p, out=False)
    _identity_args(p)
    p.set_defaults(func=_cmd_verify, out=None)
    return parser


def _apply_config(parser, argv):
    """Parse `argv` with defaults taken from the config section of the subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in sub.choices), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    cfg = configparser.ConfigParser()
    try:
        with open(known.config) as fh:
            cfg.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if cfg.has_section(command):
        subparser = sub.choices[command]
        by_dest = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, raw in cfg.items(command):
            dest = key.replace("-", "_")
            action = by_dest.get(dest)
            if action is None or dest in ("help", "config") or not action.option_strings:
                raise UsageError(f"{known.config}: unknown key {key!r} in [{command}]")
            if isinstance(action, argparse._StoreTrueAction):
                defaults[dest] = cfg.getboolean(command, key)
                continue
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"{known.config}: bad value {raw!r} for {key}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"{known.config}: {key} must be one of "
                                 f"{sorted(action.choices)}")
            defaults[dest] = value
            action.required = False
        subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    """Run the command line and return the exit code."""
    parser = build_parser()
    try:
        args = _apply_config(parser, sys.argv[1:] if argv is None else list(argv))
        if args.max_fail < 0:
            raise UsageError("--max-fail must be nonnegative")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MeasureError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TransformError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
