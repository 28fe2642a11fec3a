"""Command-line front end: ``cobranet <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, theory
from .cobrad import estimate_survival
from .dcm import dump_edge_list, sample_dcm
from .degrees import THEORY_VALID, build_sequence, compute_stats, validate
from .duality import verify_pathwise
from .experiments import (ExperimentSpec, density_csv, replay, resolve_profile, run_density_trials,
                          run_fig3, theory_summary)
from .forward import sample_grid
from .gw_tree import estimate_tree_survival, offspring_law
from .seeding import GRAPH, TRIALS, derive_seed, derive_seeds, resolve_threads, rng_for


class CliError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
    print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _load(args):
    try:
        profile = resolve_profile(args.profile, args.n)
    except (OSError, ValueError) as e:
        raise CliError(f"invalid profile: {e}") from None
    seq = build_sequence(profile)
    report = validate(seq)
    if not report.ok:
        raise CliError("invalid profile: " + "; ".join(report.violations))
    return profile, seq


def _graph(args, seq):
    g = sample_dcm(seq, rng_for(derive_seed(args.seed, GRAPH)))
    if getattr(args, "dump_graph", None):
        dump_edge_list(g, args.dump_graph)
    return g


def cmd_theory(args) -> int:
    profile, seq = _load(args)
    st = compute_stats(seq)
    report = validate(seq, THEORY_VALID)
    try:
        p_c = theory.p_critical(st.rho, s=args.s)
        rows = []
        for p in args.p:
            if p == 1.0:
                raise CliError("q_star is undefined at p = 1")
            regime = theory.classify(p, st.rho, s=args.s)
            rows.append({
                "p": p,
                "regime": regime.tag,
                "z_star": regime.z_star,
                "q_star_closed": theory.q_star_closed(p, st.rho, st.lam, s=args.s),
                "q_star_sum": theory.q_star_sum(seq, p, s=args.s),
            })
    except theory.TheoryUnavailable as e:
        raise CliError(str(e)) from None
    out = {"n": seq.n, "m": seq.m, "rho": st.rho, "lambda": st.lam, "p_c": p_c,
           "theory_valid": report.ok, "violations": report.violations, "results": rows}
    if len(rows) == 1:
        out.update(rows[0])
    print(json.dumps(out, indent=2))
    return 0


def cmd_simulate(args) -> int:
    profile, seq = _load(args)
    seed = _seed(args)
    g = _graph(args, seq)
    seeds = derive_seeds(seed, args.trials, TRIALS)
    rows = run_density_trials(g, args.p, args.s, args.t_max, args.sample_dt, seeds,
                              resolve_threads(args.threads))
    grid = sample_grid(args.t_max, args.sample_dt)
    text = density_csv(grid, rows)
    if args.out:
        Path(args.out).write_text(text)
        companion = {"seed": seed, "trial_seeds": seeds}
        if args.s == 2:
            summary = theory_summary(profile, args.p)
            companion.update({k: summary[k] for k in ("rho", "lambda", "p_c", "q_star")})
        else:
            st = compute_stats(seq)
            companion.update({"rho": st.rho, "lambda": st.lam, "p_c": None, "q_star": None})
        Path(args.out + ".theory.json").write_text(json.dumps(companion, indent=2) + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_dual(args) -> int:
    profile, seq = _load(args)
    seed = _seed(args)
    g = _graph(args, seq)
    rng = rng_for(derive_seed(seed, TRIALS))
    x = None if args.all_vertices else args.vertex
    if x is not None and not 0 <= x < g.n:
        raise CliError(f"vertex {x} out of range")
    est, se = estimate_survival(g, args.p, args.s, x, args.t_max, args.trials, rng)
    prediction = None
    if args.s == 2 and args.p < 1:
        st = compute_stats(seq)
        if x is None:
            prediction = theory.q_star_sum(seq, args.p)
        else:
            prediction = 1.0 - theory.z_hat_root(int(seq.d_plus[x]), args.p, st.rho)
    print(json.dumps({"estimate": est, "standard_error": se, "theory": prediction,
                      "vertex": x, "trials": args.trials}, indent=2))
    return 0


def cmd_tree(args) -> int:
    profile, seq = _load(args)
    seed = _seed(args)
    law = offspring_law(seq)
    d_root = args.root_degree if args.root_degree is not None else int(seq.d_plus[0])
    est, se = estimate_tree_survival(d_root, law, args.p, args.gen_cap, args.trials,
                                     rng_for(derive_seed(seed, TRIALS)))
    rho = compute_stats(seq).rho
    prediction = 1.0 - theory.z_hat_root(d_root, args.p, rho)
    print(json.dumps({"estimate": est, "standard_error": se, "theory": prediction,
                      "root_degree": d_root, "generation_cap": args.gen_cap,
                      "trials": args.trials}, indent=2))
    return 0


def cmd_verify_duality(args) -> int:
    profile, seq = _load(args)
    seed = _seed(args)
    failures = 0
    events = 0
    everyone = range(seq.n)
    for k, run_seed in enumerate(derive_seeds(seed, args.seeds, TRIALS)):
        g = sample_dcm(seq, rng_for(derive_seed(seed, GRAPH, k)))
        rep = verify_pathwise(g, args.t_max, args.p, args.s, everyone, run_seed, dump_dir=args.dump_dir)
        events += rep.n_events
        if not rep.ok:
            failures += 1
            print(f"MISMATCH seed={run_seed} vertices={sorted(rep.mismatches)}"
                  + (f" dump={rep.dump_path}" if rep.dump_path else ""), file=sys.stderr)
    print(json.dumps({"seeds": args.seeds, "events": events, "failures": failures}))
    return 1 if failures else 0


def cmd_phase_diagram(args) -> int:
    rhos = np.linspace(args.rho_min, args.rho_max, args.rho_steps)
    ps = np.linspace(0.0, 1.0, args.p_steps)
    if rhos.min() <= 0 or rhos.max() > 0.5:
        raise CliError("rho grid must lie in (0, 1/2]")
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "p", "regime", "p_c"])
        for rho in rhos.tolist():
            pc = theory.p_critical(rho)
            for p in ps.tolist():
                w.writerow([repr(rho), repr(p), theory.classify(p, rho).tag, repr(pc)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_experiment(args) -> int:
    threads = resolve_threads(args.threads)
    out = args.out or "fig3-out"
    if args.replay:
        manifest = replay(args.replay, out, threads, log=print)
    else:
        seed = _seed(args)
        spec = ExperimentSpec.for_scale(args.scale, trials=args.trials, seed=seed, out=out,
                                        t_max=args.t_max, sample_dt=args.sample_dt)
        manifest = run_fig3(spec, threads, log=print)
    print(f"wrote {len(manifest.outputs)} files and manifest.json to {out}")
    return 0


def _common(sub, profile=True, randomized=True):
    g = sub.add_argument_group("common")
    if profile:
        g.add_argument("--profile", required=True, help="profile JSON path or preset: red, green, blue")
        g.add_argument("--n", type=int, default=None, help="vertex count (must match the profile total)")
    if randomized:
        g.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        g.add_argument("--threads", type=int, default=None, help="worker processes (env COBRANET_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cobranet", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("theory", help="closed-form predictions for a degree profile")
    _common(sp, randomized=False)
    sp.add_argument("--p", type=float, nargs="+", required=True)
    sp.add_argument("--s", type=int, default=2)
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("simulate", help="red-density trajectories of the opinion dynamics")
    _common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--t-max", type=float, default=50.0)
    sp.add_argument("--sample-dt", type=float, default=0.5)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--out", help="CSV path (stdout if omitted)")
    sp.add_argument("--dump-graph", help="write the sampled graph as an edge list")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("dual", help="Monte-Carlo survival of the dual particle system")
    _common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--s", type=int, default=2)
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--vertex", type=int)
    which.add_argument("--all-vertices", action="store_true")
    sp.add_argument("--t-max", type=float, default=30.0)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--dump-graph")
    sp.set_defaults(func=cmd_dual)

    sp = sub.add_parser("tree", help="survival of the percolated random tree")
    _common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--root-degree", type=int, default=None)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--gen-cap", type=int, default=60)
    sp.set_defaults(func=cmd_tree)

    sp = sub.add_parser("verify-duality", help="pathwise forward/backward check; exit 1 on mismatch")
    _common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--seeds", type=int, default=200)
    sp.add_argument("--dump-dir", default=None, help="directory for event logs of failing seeds")
    sp.set_defaults(func=cmd_verify_duality)

    sp = sub.add_parser("phase-diagram", help="regime grid over (rho, p)")
    sp.add_argument("--rho-min", type=float, default=0.01)
    sp.add_argument("--rho-max", type=float, default=0.5)
    sp.add_argument("--rho-steps", type=int, default=50)
    sp.add_argument("--p-steps", type=int, default=101)
    sp.add_argument("--out", help="CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_phase_diagram)

    sp = sub.add_parser("experiment", help="preset experiments")
    sp.add_argument("name", choices=["fig3"])
    sp.add_argument("--scale", choices=["full", "desk"], default="desk")
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--t-max", type=float, default=50.0)
    sp.add_argument("--sample-dt", type=float, default=0.5)
    sp.add_argument("--out", help="output directory (default fig3-out)")
    sp.add_argument("--replay", help="manifest.json of an earlier run to reproduce")
    _common(sp, profile=False)
    sp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
