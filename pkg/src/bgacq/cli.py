"""Command line entry point.

Exit status: 0 success, 1 numerical failure (including a failed comparison
with published values), 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .errors import BGACQError
from .harness import experiments as ex
from .kernels import parse_kernel
from .quadrature import (compute_weights, corrected_apply, forward_apply, sample,
                         solve_convolution_equation)
from .scheme import Grid, SchemeParams, assemble_tableau
from .stability import certify_assumption

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _data_function(expr):
    """Vectorized callable from a numpy expression in ``t``."""
    code = compile(expr, "<g>", "eval")
    ns = {name: getattr(np, name) for name in
          ("sin", "cos", "exp", "log", "sqrt", "pi", "abs", "tanh", "sinh", "cosh")}

    def g(t):
        return np.broadcast_to(eval(code, {"__builtins__": {}}, {**ns, "t": t}),
                               np.shape(t)).astype(float)

    return g


def _scheme(args):
    for k in ("k1", "k2", "m"):
        if getattr(args, k) is None:
            raise ConfigError(f"--{k} is required")
    try:
        return assemble_tableau(SchemeParams(args.k1, args.k2, args.m))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _kernel(args):
    if not args.kernel:
        raise ConfigError("--kernel is required")
    try:
        return parse_kernel(args.kernel)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad kernel {args.kernel!r}: {exc}") from None


def _grid(args, m):
    if args.T is None or args.N is None:
        raise ConfigError("--T and --N are required")
    N = args.N[-1] if isinstance(args.N, list) else args.N
    if not args.T > 0 or N < 1:
        raise ConfigError("need T > 0 and N >= 1")
    return Grid(args.T, N, m)


def _out_path(args, default):
    if not args.out:
        return None
    if os.path.isdir(args.out) or args.out.endswith(os.sep):
        os.makedirs(args.out, exist_ok=True)
        return os.path.join(args.out, default)
    return args.out


def cmd_tableau(args):
    tab = _scheme(args)
    path = _out_path(args, f"tableau_{args.k1}_{args.k2}_{args.m}.csv")
    if path:
        tab.to_csv(path)
        print(path)
    else:
        np.set_printoptions(precision=17, linewidth=200)
        print("Atilde =\n", tab.full_A)
        print("Ltilde =\n", tab.full_L)
    return EXIT_OK


def cmd_stability(args):
    tab = _scheme(args)
    rep = certify_assumption(tab)
    text = rep.to_text()
    path = _out_path(args, f"stability_{args.k1}_{args.k2}_{args.m}.txt")
    if path:
        with open(path, "w") as f:
            f.write(text)
    print(text, end="")
    return EXIT_OK if rep.assumption_satisfied else EXIT_NUMERIC


def cmd_weights(args):
    tab = _scheme(args)
    k = _kernel(args)
    grid = _grid(args, tab.m)
    wt = compute_weights(tab, k, grid.h, grid.N, args.tol)
    path = _out_path(args, f"weights_{args.k1}_{args.k2}_{args.m}.csv")
    if path:
        wt.save(path)
        print(path)
    print(f"rho={wt.contour_rho:.6g} L_contour={wt.contour_points} "
          f"max_imag_leak={wt.max_imag_leak:.3e} "
          f"max cond(P)={np.nanmax(wt.eig_condition):.3e}")
    return EXIT_OK


def _write_values(args, grid, U, default):
    path = _out_path(args, default)
    ts = grid.block_nodes.ravel()
    vals = np.asarray(U).ravel()
    lines = ["t,value"] + [f"{float(t)!r},{float(np.real(v))!r}" for t, v in zip(ts, vals)]
    if path:
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        print(path)
    else:
        print("\n".join(lines))


def cmd_apply(args):
    tab = _scheme(args)
    k = _kernel(args)
    grid = _grid(args, tab.m)
    if not args.g:
        raise ConfigError("--g is required")
    s = sample(_data_function(args.g), grid)
    wt = compute_weights(tab, k, grid.h, grid.N, args.tol)
    U = corrected_apply(wt, k, grid, s) if args.corrected else forward_apply(wt, s)
    _write_values(args, grid, U, "apply.csv")
    return EXIT_OK


def cmd_solve(args):
    tab = _scheme(args)
    k = _kernel(args)
    grid = _grid(args, tab.m)
    if not args.g:
        raise ConfigError("--g is required")
    wt = compute_weights(tab, k, grid.h, grid.N, args.tol)
    U = solve_convolution_equation(wt, sample(_data_function(args.g), grid))
    _write_values(args, grid, U, "solve.csv")
    return EXIT_OK


def _config_from_args(args):
    if args.config:
        try:
            cfg = ex.ExperimentConfig.from_file(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if args.id and args.id != cfg.experiment:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {args.id!r}")
    else:
        if not args.id:
            raise ConfigError("experiment id or --config required")
        cfg = ex.ExperimentConfig(args.id)
    if args.out:
        cfg.out = args.out
    if args.T is not None:
        cfg.T = args.T
    if args.N is not None:
        cfg.Ns = args.N
    if args.kernel:
        cfg.kernel = args.kernel
    if args.tol != 1e-16:
        cfg.tol = args.tol
    if args.k1 is not None and args.k2 is not None and args.m is not None:
        cfg.schemes = [(args.k1, args.k2, args.m)]
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _kw(cfg, **names):
    out = {}
    for attr, key in names.items():
        v = getattr(cfg, attr)
        if v not in (None, []):
            out[key] = v
    return out


def _param_list(cfg, key, cast=float):
    if key in cfg.params:
        return {key: tuple(cast(x) for x in cfg.params[key].split(","))}
    return {}


def _print_reports(reports):
    for rep in reports.values():
        print(rep)
        print()


def cmd_experiment(args):
    cfg = _config_from_args(args)
    eid = cfg.experiment
    status = EXIT_OK
    if eid in ("table1", "table2", "table3", "stability"):
        res = ex.run_stability_tables(out=cfg.out, boundary=eid == "stability")
        tables = ("table1", "table2", "table3") if eid == "stability" else (eid,)
        for name in tables:
            rows = res[name]
            bad = [r for r in rows if not r[3]]
            print(f"{name}: {len(rows) - len(bad)}/{len(rows)} entries match")
            for r in bad:
                print(f"  mismatch: {r[0]} computed={r[1]} published={r[2]}")
            if bad:
                status = EXIT_NUMERIC
        if eid == "stability":
            ex.run_dissipation(out=cfg.out)
    elif eid == "example1":
        kw = _kw(cfg, Ns="Ns", T="T", out="out", tol="tol")
        if cfg.schemes:
            kw["scheme"] = cfg.schemes[0]
        kw.update(_param_list(cfg, "mus"))
        _print_reports(ex.run_example1(**kw))
    elif eid == "example2":
        kw = _kw(cfg, Ns="Ns", T="T", out="out", tol="tol", schemes="schemes")
        kw.update(_param_list(cfg, "alphas"))
        _print_reports(ex.run_example2(**kw))
    elif eid == "example3":
        kw = _kw(cfg, T="T", out="out", tol="tol", schemes="schemes")
        for name, err in ex.run_example3(**kw).items():
            if err is None:
                err = "not implemented" if name.endswith("RKCQ") else "skipped"
            else:
                err = f"{err:.3e}"
            print(f"{name:14s} {err}")
    elif eid == "example4":
        kw = _kw(cfg, out="out", tol="tol")
        if cfg.Ns:
            kw["node_sweep"] = tuple(cfg.Ns)
        kw.update(_param_list(cfg, "omegas"))
        res = ex.run_example4(**kw)
        for row in res["nodes"] + res["omega"]:
            print("{:14s} omega={:<6g} nodes={:<5d} rel_err={:.3e}".format(*row))
    elif eid == "custom":
        if not (cfg.kernel and cfg.schemes and cfg.Ns and cfg.T and "g" in cfg.params):
            raise ConfigError("custom needs kernel, schemes, N, T and g")
        k = parse_kernel(cfg.kernel)
        tab = assemble_tableau(SchemeParams(*cfg.schemes[0]))
        g = _data_function(cfg.params["g"])
        for N in cfg.Ns:
            grid = Grid(cfg.T, N, tab.m)
            wt = compute_weights(tab, k, grid.h, N, cfg.tol)
            U = forward_apply(wt, sample(g, grid))
            print(f"N={N} value at T: {float(np.real(U[-1, -1]))!r}")
    return status


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k1", type=int)
    common.add_argument("--k2", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--kernel", help="name[:key=value,...]")
    common.add_argument("--T", type=float)
    common.add_argument("--N", type=lambda s: [int(x) for x in s.split(",")],
                        help="block count, or comma-separated sweep")
    common.add_argument("--tol", type=float, default=1e-16)
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--format", choices=["csv"], default="csv")
    common.add_argument("--config", help="key=value experiment file")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bgacq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("tableau", parents=[common], help="print or dump the tableau")
    sub.add_parser("stability", parents=[common], help="certify a scheme")
    sub.add_parser("weights", parents=[common], help="compute and dump weights")
    for name, helptext in (("apply", "evaluate K(d/dt) g"), ("solve", "solve K(d/dt) u = g")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--g", help="numpy expression in t, e.g. 'sin(t)**2'")
        if name == "apply":
            sp.add_argument("--corrected", action="store_true",
                            help="add start-up correction for data not vanishing at 0")
    sp = sub.add_parser("experiment", parents=[common], help="run a reproduction experiment")
    sp.add_argument("id", nargs="?", choices=ex.ExperimentConfig.EXPERIMENTS)
    return p


COMMANDS = {"tableau": cmd_tableau, "stability": cmd_stability, "weights": cmd_weights,
            "apply": cmd_apply, "solve": cmd_solve, "experiment": cmd_experiment}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.N is not None and args.command != "experiment" and len(args.N) != 1:
        print("error: a single --N is expected here", file=sys.stderr)
        return EXIT_CONFIG
    if args.N is not None and args.command != "experiment":
        args.N = args.N[0]
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BGACQError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
