"""Command-line interface: ``strip6v <command> [flags]``.

Every command accepts ``--config FILE``, a key-value file whose keys mirror
the flag names (``theta1 = 0.2``, ``path = "URU"``; section headers are
allowed and ignored).  Flags given on the command line override the file.
Results go to ``--output`` (stdout by default) as CSV or JSON; a one-line
summary goes to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import math
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import askey_wilson as aw
from . import dynamics, exact, mpa
from .lattice import PathError, build_path, parse_path
from .params import ParameterError, StripParams, derive_params

PARAM_NAMES = ("a", "b", "c", "d", "theta1", "theta2")


# ------------------------------------------------------------- arguments

def _number(text: str):
    """Float, or Fraction for literals like ``3/10`` (exact arithmetic)."""
    text = str(text).strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _grid(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("grid must look like 50x50")
    return int(parts[0]), int(parts[1])


def _add_params(p: argparse.ArgumentParser, suffix: str = "") -> None:
    for name in PARAM_NAMES:
        p.add_argument(f"--{name}{suffix}", type=_number, default=None)


def _add_path(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="width N (horizontal path when --path is omitted)")
    p.add_argument("--path", default=None, help="edge labels over {U,R}, e.g. URU")
    p.add_argument("--anchor", type=int, default=None, help="height of the left endpoint")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strip6v", description="Stochastic six-vertex model on a strip.")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", default=None, help="key = value file mirroring the flags")
        sp.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
        return sp

    sp = cmd("simulate", "sample trajectories")
    _add_params(sp)
    _add_path(sp)
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--replicas", type=int, default=1,
                    help="1 writes a trajectory; more writes the empirical final distribution")
    sp.add_argument("--init", default=None, help="initial occupations as a 0/1 string")
    sp.add_argument("--backend", choices=("numba", "numpy"), default=None)

    sp = cmd("couple", "two-colour coupled dynamics")
    _add_params(sp)
    for name in ("a", "b", "c", "d"):
        sp.add_argument(f"--{name}2", type=_number, default=None)
    _add_path(sp)
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--init1", default=None)
    sp.add_argument("--init2", default=None)
    sp.add_argument("--backend", choices=("numba", "numpy"), default=None)

    sp = cmd("stationary", "exact stationary measure on a path")
    _add_params(sp)
    _add_path(sp)
    sp.add_argument("--method", choices=("moves", "direct"), default="moves")

    sp = cmd("mpa", "matrix-ansatz stationary measure on a path")
    _add_params(sp)
    _add_path(sp)
    sp.add_argument("--mode", choices=mpa.MODES, default="float")
    sp.add_argument("--precision", type=int, default=None, help="decimal digits in mpmath mode")
    sp.add_argument("--json", action="store_true", help="write derived parameters as JSON instead")

    sp = cmd("verify-tilting", "compare strip and tilted ASEP stationary measures")
    _add_params(sp)
    sp.add_argument("--n", type=int, default=None)

    sp = cmd("scaling-check", "distance of rescaled kernels to the ASEP generator")
    sp.add_argument("--rates", type=_floats, default=None, help="alpha,beta,gamma,delta,L,R")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--eps", type=_floats, default=None, help="comma separated, e.g. 1e-2,1e-3,1e-4")

    sp = cmd("aw-measure", "Askey-Wilson measure: atoms, masses, total mass")
    sp.add_argument("--aw", type=_floats, default=None, help="a,b,c,d,q")

    sp = cmd("partition", "Z_N(t) by quadrature and by the matrix ansatz")
    _add_params(sp)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--t", type=float, default=1.0)

    sp = cmd("density", "mean particle density and its large-N limit")
    _add_params(sp)
    sp.add_argument("--n-list", type=_ints, default=None, help="comma separated widths")
    sp.add_argument("--method", choices=("auto", "aw", "mpa"), default="auto")

    sp = cmd("phase-sweep", "phase labels over an (A, C) grid")
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument("--q", type=float, default=0.4)
    sp.add_argument("--grid", type=_grid, default=(20, 20))
    sp.add_argument("--a-range", type=_floats, default=[0.05, 3.0])
    sp.add_argument("--c-range", type=_floats, default=[0.05, 3.0])
    sp.add_argument("--nmax", type=int, default=0, help="also report the density at this width")
    sp.add_argument("--n-list", type=_ints, default=None)
    return parser


def _read_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        text = fh.read()
    if not text.lstrip().startswith("["):
        text = "[default]\n" + text
    cp.read_string(text)
    out = {}
    for section in cp.sections():
        for k, v in cp[section].items():
            out[k.replace("-", "_")] = v.strip().strip('"').strip("'")
    return out


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    conf = _read_config(args.config)
    sp = parser._subparsers._group_actions[0].choices[args.command]
    defaults = {}
    for action in sp._actions:
        if action.dest not in conf:
            continue
        raw = conf[action.dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[action.dest] = action.type(raw) if action.type else raw
    # file values become defaults, so explicit flags still win
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


# ------------------------------------------------------------- helpers

def _params(args, suffix: str = "", base: StripParams | None = None) -> StripParams:
    vals = {}
    for name in PARAM_NAMES:
        v = getattr(args, f"{name}{suffix}", None) if (suffix == "" or name[0] in "abcd") else None
        if v is None and base is not None:
            v = getattr(base, name)
        if v is None:
            raise ParameterError(f"missing parameter --{name}{suffix}")
        vals[name] = v
    if any(isinstance(v, Fraction) for v in vals.values()) and not all(isinstance(v, Fraction)
                                                                         for v in vals.values()):
        vals = {k: float(v) for k, v in vals.items()}
    return StripParams(**vals)


def _path(args):
    if args.path:
        return parse_path(args.path, args.anchor)
    if args.n is None:
        raise ParameterError("give --n or --path")
    return build_path(args.n, None, args.anchor)


def _bits(text, N):
    if text is None:
        return None
    if len(text) != N or set(text) - {"0", "1"}:
        raise ParameterError(f"initial configuration must be a 0/1 string of length {N}")
    return np.array([int(ch) for ch in text], dtype=np.uint8)


@contextlib.contextmanager
def _open(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _require(value, flag):
    if value is None:
        raise ParameterError(f"missing {flag}")
    return value


# ------------------------------------------------------------- commands

def cmd_simulate(args) -> str:
    p = _params(args)
    path = _path(args)
    init = _bits(args.init, path.N)
    with _open(args.output) as fh:
        if args.replicas == 1:
            traj = dynamics.evolve(path, init, p, args.steps, seed=args.seed, backend=args.backend)
            dynamics.write_trajectory_csv(fh, traj)
            return f"simulate: N={path.N} steps={args.steps} final density={traj[-1].mean():.6f}"
        states = dynamics.evolve_ensemble(path, init, p, args.steps, args.replicas, seed=args.seed,
                                          backend=args.backend)
        dist = dynamics.empirical_distribution(states)
        exact.write_distribution_csv(fh, dist, path.N)
        return f"simulate: N={path.N} replicas={args.replicas} mean density={states.mean():.6f}"


def cmd_couple(args) -> str:
    p = _params(args)
    p2 = _params(args, "2", base=p)
    path = _path(args)
    traj = dynamics.evolve_coupled(path, _bits(args.init1, path.N), _bits(args.init2, path.N), p, p2,
                                   args.steps, seed=args.seed, backend=args.backend)[:, 0, :]
    with _open(args.output) as fh:
        dynamics.write_trajectory_csv(fh, traj, colored=True)
    return f"couple: N={path.N} steps={args.steps} ordering violations={dynamics.ordering_violations(traj)}"


def cmd_stationary(args) -> str:
    p = _params(args)
    path = _path(args)
    K = exact.transition_matrix(path, p, method=args.method)
    mu = exact.stationary_exact(K)
    with _open(args.output) as fh:
        exact.write_distribution_csv(fh, mu, path.N)
    return f"stationary: path {path} residual={exact.stationary_residual(K, mu):.3g}"


def cmd_mpa(args) -> str:
    p = _params(args)
    path = _path(args)
    dp = derive_params(p)
    with _open(args.output) as fh:
        if args.json:
            exact.dump_json(dp.as_dict(), fh)
        else:
            mu = mpa.mpa_measure(path, p, mode=args.mode, dps=args.precision)
            exact.write_distribution_csv(fh, mu, path.N)
    return (f"mpa: path {path} q={float(dp.q):.6g} r={float(dp.r):.6g} "
            f"A={dp.A:.6g} C={dp.C:.6g}")


def cmd_verify_tilting(args) -> str:
    p = _params(args)
    rep = exact.verify_tilting(p, _require(args.n, "--n"))
    with _open(args.output) as fh:
        exact.dump_json(rep, fh)
    return f"verify-tilting: N={rep['N']} max_abs_error={rep['max_abs_error']:.3g}"


def cmd_scaling_check(args) -> str:
    rates = _require(args.rates, "--rates")
    if len(rates) != 6:
        raise ParameterError("--rates needs six values alpha,beta,gamma,delta,L,R")
    rep = exact.scaling_limit_check(rates, _require(args.n, "--n"), _require(args.eps, "--eps"))
    with _open(args.output) as fh:
        exact.dump_json(rep, fh)
    return "scaling-check: error ratios " + ", ".join(f"{x:.4g}" for x in rep["ratios"])


def cmd_aw_measure(args) -> str:
    vals = _require(args.aw, "--aw")
    if len(vals) != 5:
        raise ParameterError("--aw needs five values a,b,c,d,q")
    m = aw.aw_measure(*vals)
    cont = m.continuous_mass()
    rep = {"params": dict(zip("abcdq", vals)), "continuous_mass": cont,
           "atoms": [{"y": at.y, "mass": at.mass, "chi": at.chi, "j": at.j} for at in m.atoms],
           "total_mass": cont + m.atom_mass(), "near_threshold": [list(x) for x in m.near_threshold]}
    with _open(args.output) as fh:
        exact.dump_json(rep, fh)
    return f"aw-measure: {len(m.atoms)} atoms, total mass {rep['total_mass']:.12f}"


def cmd_partition(args) -> str:
    p = _params(args)
    N = _require(args.n, "--n")
    log_aw, ex = aw.log_partition_Z(N, args.t, p)
    log_mpa, _ = mpa.partition_mpa(N, args.t, p, mode="mpmath", derivative=True)
    log_mpa = float(log_mpa)
    rel = math.expm1(log_aw - log_mpa)
    rep = {"N": N, "t": args.t, "log_Z_aw": log_aw, "log_Z_mpa": log_mpa, "relative_error": rel,
           "continuous_share": ex.continuous_share, "atom_shares": list(ex.atom_shares)}
    with _open(args.output) as fh:
        exact.dump_json(rep, fh)
    return f"partition: N={N} t={args.t} log Z={log_aw:.12g} relative error={rel:.3g}"


def cmd_density(args) -> str:
    p = _params(args)
    ns = _require(args.n_list, "--n-list")
    rep = aw.phase_limit(p)
    dens = [aw.mean_density(n, p, method=args.method) for n in ns]
    out = {"phase": rep.as_dict(), "N": ns, "density": dens,
           "error": [None if rep.limit_density is None else d - rep.limit_density for d in dens]}
    with _open(args.output) as fh:
        exact.dump_json(out, fh)
    return f"density: {rep.phase or rep.region} limit={rep.limit_density} last={dens[-1]:.10g}"


def cmd_phase_sweep(args) -> str:
    r = _require(args.r, "--r")
    ns = args.n_list or ([args.nmax] if args.nmax else [])
    rows = aw.phase_sweep(r, args.grid, tuple(args.a_range), tuple(args.c_range), q=args.q, n_list=ns)
    with _open(args.output) as fh:
        aw.write_sweep_csv(fh, rows)
    counts = {}
    for row in rows:
        key = row["phase"] or row["region"]
        counts[key] = counts.get(key, 0) + 1
    return "phase-sweep: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))


COMMANDS = {
    "simulate": cmd_simulate, "couple": cmd_couple, "stationary": cmd_stationary, "mpa": cmd_mpa,
    "verify-tilting": cmd_verify_tilting, "scaling-check": cmd_scaling_check,
    "aw-measure": cmd_aw_measure, "partition": cmd_partition, "density": cmd_density,
    "phase-sweep": cmd_phase_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        summary = COMMANDS[args.command](args)
    except (ParameterError, PathError, ValueError, OSError, ArithmeticError) as exc:
        print(f"strip6v {args.command}: error: {exc}", file=sys.stderr)
        return 2
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
