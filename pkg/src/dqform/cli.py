"""Command line experiment runner.

Subcommands: ``spectrum``, ``simulate``, ``noise`` and ``gen``. Every CSV is
a deterministic function of the flags and the seed. Exit codes: 0 success,
2 argument error, 3 numerical precondition failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional, TextIO

import numpy as np

from dqform.control import SimConfig, simulate
from dqform.dq_algebra import random_udq_array
from dqform.errors import DqFormError, NoSpanningTree, NotSimpleZero, RankDeficient
from dqform.feasibility import nearest_feasible, write_repair
from dqform.graph_topology import make_topology, underlying_laplacian, write_graph
from dqform.spectral import lambda2r, theory_rate
from dqform.udqdg import (
    build_dq_laplacian,
    desired_formation,
    perturb_scheme,
    relative_scheme,
    write_formation,
    write_scheme,
)

SPECTRUM_TIMES = (10, 30, 50, 70)
EXIT_ARGS = 2
EXIT_NUMERIC = 3


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class _ArgError(Exception):
    pass


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("DQFORM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise _ArgError(f"DQFORM_SEED must be an integer, got {env!r}") from exc


def _setup(args):
    try:
        g = make_topology(args.topology, args.n, args.directed)
        f = desired_formation(args.topology, args.n)
    except DqFormError as exc:
        raise _ArgError(str(exc)) from exc
    return g, f


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write(path: Optional[str], text: str) -> TextIO:
    out, close = _open_out(path)
    try:
        out.write(text)
    finally:
        if close:
            out.close()
    return sys.stdout if close else sys.stderr


def cmd_spectrum(args) -> int:
    g, _ = _setup(args)
    lam = lambda2r(underlying_laplacian(g))
    header = "topology,n,directed,lambda2r," + ",".join(f"rate_t{t}" for t in SPECTRUM_TIMES)
    row = [args.topology, str(args.n), str(int(args.directed)), fmt(lam)]
    row += [fmt(theory_rate(lam, t)) for t in SPECTRUM_TIMES]
    _write(args.out, header + "\n" + ",".join(row) + "\n")
    return 0


def _sim_config(args, scheme, formation, initial=None, seed=0) -> SimConfig:
    return SimConfig(
        scheme=scheme,
        alpha=args.alpha,
        k_max=args.kmax,
        rng_seed=seed,
        record_every=args.record_every,
        use_stop=not args.no_stop,
        formation=formation,
        initial=initial,
    )


def _state_rows(traj) -> str:
    lines = ["k,agent,qs_w,qs_x,qs_y,qs_z,qd_w,qd_x,qd_y,qd_z"]
    for k, z in zip(traj.steps, traj.states):
        for i, q in enumerate(z, start=1):
            lines.append(f"{k},{i}," + ",".join(fmt(v) for v in q.reshape(-1)))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    g, f = _setup(args)
    seed = _resolve_seed(args.seed)
    traj = simulate(_sim_config(args, relative_scheme(f, g), f, seed=seed))
    lines = ["k,t,err"]
    lines += [f"{k},{fmt(t)},{fmt(e)}" for k, t, e in zip(traj.steps, traj.times, traj.errors)]
    log = _write(args.out, "\n".join(lines) + "\n")
    if args.states:
        _write(args.states, _state_rows(traj))
    print(f"stopped_at={traj.stopped_at} converged={int(traj.converged)} "
          f"final_err={fmt(traj.errors[-1])}", file=log)
    return 0


def run_noise(topology: str, n: int, directed: bool, sigma: float, seed: int,
              alpha: float = 0.2, k_max: int = 500, record_every: int = 1, use_stop: bool = False):
    """Raw-noisy and repaired-scheme simulations from one initial state.

    Returns ``(raw_trajectory, repaired_trajectory, repair_result)``.
    """
    g = make_topology(topology, n, directed)
    f = desired_formation(topology, n)
    noisy = perturb_scheme(relative_scheme(f, g), sigma, seed)
    repair = nearest_feasible(build_dq_laplacian(noisy))
    repaired_formation = repair.formation()
    repaired = relative_scheme(repaired_formation, g)

    z0 = random_udq_array(np.random.default_rng(seed), g.n)
    common = dict(alpha=alpha, k_max=k_max, record_every=record_every, use_stop=use_stop, initial=z0)
    raw = simulate(SimConfig(scheme=noisy, formation=f, **common))
    rep = simulate(SimConfig(scheme=repaired, formation=repaired_formation, **common))
    return raw, rep, repair


def cmd_noise(args) -> int:
    _setup(args)
    if args.sigma is None or args.sigma < 0:
        raise _ArgError("noise needs --sigma >= 0")
    seed = _resolve_seed(args.seed)
    raw, rep, repair = run_noise(
        args.topology, args.n, args.directed, args.sigma, seed,
        alpha=args.alpha, k_max=args.kmax, record_every=args.record_every, use_stop=not args.no_stop,
    )
    m = min(len(raw.steps), len(rep.steps))
    lines = ["k,t,err_raw,err_repaired"]
    for i in range(m):
        lines.append(f"{raw.steps[i]},{fmt(raw.times[i])},{fmt(raw.errors[i])},{fmt(rep.errors[i])}")
    log = _write(args.out, "\n".join(lines) + "\n")
    if args.repair_out:
        _write(args.repair_out, write_repair(repair))
    print(f"residual={fmt(repair.residual)} residual_after={fmt(repair.residual_after)} "
          f"final_err_raw={fmt(raw.errors[-1])} final_err_repaired={fmt(rep.errors[m - 1])}", file=log)
    return 0


def cmd_gen(args) -> int:
    g, f = _setup(args)
    if args.what == "graph":
        text = write_graph(g)
    elif args.what == "formation":
        text = write_formation(f)
    else:
        s = relative_scheme(f, g)
        if args.sigma:
            if args.sigma < 0:
                raise _ArgError("--sigma must be >= 0")
            s = perturb_scheme(s, args.sigma, _resolve_seed(args.seed))
        text = write_scheme(s)
    _write(args.out, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dqform", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--topology", choices=("cycle", "star", "grid"), required=True)
        sp.add_argument("--n", type=int, required=True, help="total number of agents")
        d = sp.add_mutually_exclusive_group()
        d.add_argument("--directed", dest="directed", action="store_true", default=True)
        d.add_argument("--undirected", dest="directed", action="store_false")
        sp.add_argument("--out", default=None, help="output path (stdout if omitted)")
        sp.add_argument("--seed", type=int, default=None, help="falls back to $DQFORM_SEED, then 0")

    def sim_flags(sp, kmax):
        sp.add_argument("--alpha", type=float, default=0.2)
        sp.add_argument("--kmax", type=int, default=kmax)
        sp.add_argument("--no-stop", action="store_true", help="disable the step-size stopping test")
        sp.add_argument("--record-every", type=int, default=1)

    sp = sub.add_parser("spectrum", help="lambda_2r and theoretical rates")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("simulate", help="noise-free projected iteration")
    common(sp)
    sim_flags(sp, 350)
    sp.add_argument("--states", default=None, help="optional state dump CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("noise", help="raw noisy scheme vs repaired scheme")
    common(sp)
    sim_flags(sp, 500)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--repair-out", default=None, help="optional repaired configuration dump")
    sp.set_defaults(func=cmd_noise)

    sp = sub.add_parser("gen", help="dump a topology, formation or scheme")
    common(sp)
    sp.add_argument("--what", choices=("graph", "formation", "scheme"), default="graph")
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "alpha", 1.0) <= 0 or getattr(args, "kmax", 0) < 0 or getattr(args, "record_every", 1) < 1:
        parser.error("--alpha must be > 0, --kmax >= 0, --record-every >= 1")
    try:
        return args.func(args)
    except _ArgError as exc:
        print(f"dqform: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (NoSpanningTree, RankDeficient, NotSimpleZero) as exc:
        print(f"dqform: numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
