"""Command-line interface.

Subcommands: simulate, verify, aggregate, crossing, collapse, profile.
Exit codes: 0 success, 1 failed checks or contract violations, 2 usage.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys

import numpy as np

from . import analysis, oracle
from .circuit import CircuitConfig
from .stabilizer import InitialStateKind


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="run a trajectory ensemble")
    p.add_argument("--L", type=int, action="append", required=False)
    p.add_argument("--p", type=float, action="append", required=False)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=[k.value for k in InitialStateKind],
                   default="product")
    p.add_argument("--cnot-prob", type=float, default=0.9)
    p.add_argument("--observables", type=str, default=None,
                   help="comma-separated observable names")
    p.add_argument("--record-every", type=int, default=0)
    p.add_argument("--out", type=str, default="trajectories.jsonl")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with any of the above fields")


def _simulate(args) -> int:
    fields = {
        "L": args.L, "p": args.p, "T": args.T, "samples": args.samples,
        "seed": args.seed, "init": args.init, "cnot_prob": args.cnot_prob,
        "observables": args.observables, "record_every": args.record_every,
        "out": args.out, "workers": args.workers,
    }
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        for key, val in loaded.items():
            if key not in fields:
                print(f"unknown config key {key!r}", file=sys.stderr)
                return 2
            if fields[key] in (None, argparse.SUPPRESS) or key not in _cli_set(args):
                fields[key] = val
    if not fields["L"] or not fields["p"]:
        print("simulate needs at least one --L and one --p", file=sys.stderr)
        return 2
    Ls = fields["L"] if isinstance(fields["L"], list) else [fields["L"]]
    ps = fields["p"] if isinstance(fields["p"], list) else [fields["p"]]
    names = fields["observables"]
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    spec = analysis.EnsembleSpec(
        points=[(L, p, fields["samples"]) for L, p in itertools.product(Ls, ps)],
        out=fields["out"],
        initial_state=InitialStateKind(fields["init"]),
        T=fields["T"],
        cnot_prob=fields["cnot_prob"],
        master_seed=fields["seed"],
        record_every=fields["record_every"],
        observables=names,
        workers=fields["workers"],
    )
    path = analysis.run_ensemble(spec)
    print(f"wrote {path}")
    return 0


def _cli_set(args) -> set[str]:
    # Flags explicitly present on the command line win over --config values.
    present = set()
    argv = sys.argv[1:]
    for name in ("L", "p", "T", "samples", "seed", "init", "cnot_prob",
                 "observables", "record_every", "out", "workers"):
        flag = "--" + name.replace("_", "-")
        if any(a == flag or a.startswith(flag + "=") for a in argv):
            present.add(name)
    return present


def _add_verify(sub):
    p = sub.add_parser("verify", help="oracle validation suite")
    p.add_argument("--L", type=int, action="append", default=None)
    p.add_argument("--p-grid", type=str, default="0,0.25,0.5,0.75,1")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--cap", type=int, default=2000)
    p.add_argument("--regions", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)


def _verify(args) -> int:
    from . import circuit, observables as obs_mod
    from .circuit import run_trajectory

    Ls = args.L or [4]
    ps = [float(x) for x in args.p_grid.split(",") if x.strip()]
    report = {"runs": 0, "entropy_checks": 0, "entropy_mismatches": [],
              "ie_checks": 0, "ie_violations": 0,
              "complement_checks": 0, "complement_violations": 0}
    region_rng = np.random.default_rng(args.seed)
    for L in Ls:
        for p in ps:
            for seed in range(args.seeds):
                for kind in InitialStateKind:
                    config = CircuitConfig(L=L, p=p, master_seed=args.seed,
                                           initial_state=kind,
                                           record_every=2 * L)
                    names = circuit.default_observables(config)
                    try:
                        eff = run_trajectory(config, seed, names)
                    except AssertionError as exc:
                        print(f"contract violation: {exc}", file=sys.stderr)
                        return 1

                    def snap(layer, full, kind=kind, names=names):
                        out = {"obs": oracle.oracle_observables(full, names, kind)
                               if names else {}}
                        ie = oracle.check_ie_symmetry(full, args.regions,
                                                      region_rng)
                        out["ie"] = len(ie["violations"])
                        if kind is InitialStateKind.BELL_REFERENCE:
                            cs = oracle.check_complement_symmetry(
                                full, args.regions, region_rng)
                            out["comp"] = len(cs["violations"])
                        return out

                    try:
                        full_snaps = oracle.evolve_full(
                            config, seed, qubit_cap=args.cap, on_snapshot=snap)
                    except oracle.QubitCapExceeded as exc:
                        print(str(exc), file=sys.stderr)
                        return 1
                    report["runs"] += 1
                    for (layer, res), esnap in zip(full_snaps, eff.snapshots):
                        for name in names:
                            report["entropy_checks"] += 1
                            if res["obs"][name] != esnap.values[name]:
                                report["entropy_mismatches"].append(
                                    {"L": L, "p": p, "seed": seed,
                                     "init": kind.value, "layer": layer,
                                     "observable": name,
                                     "efficient": esnap.values[name],
                                     "oracle": res["obs"][name]})
                        report["ie_checks"] += args.regions
                        report["ie_violations"] += res["ie"]
                        if "comp" in res:
                            report["complement_checks"] += args.regions
                            report["complement_violations"] += res["comp"]
    ok = (not report["entropy_mismatches"] and report["ie_violations"] == 0
          and report["complement_violations"] == 0)
    report["ok"] = ok
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qdcsim",
        description="Noisy-transduction brickwork circuit simulator and "
                    "scaling analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_verify(sub)

    p = sub.add_parser("aggregate", help="aggregate raw trajectory files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", type=str, required=True)

    p = sub.add_parser("crossing", help="estimate the critical p from an "
                                        "I3 crossing of two sizes")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--L1", type=int, required=True)
    p.add_argument("--L2", type=int, required=True)
    p.add_argument("--observable", default="I3")
    p.add_argument("--layer", type=int, default=None)

    p = sub.add_parser("collapse", help="finite-size-scaling collapse fit")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--p-min", type=float, required=True)
    p.add_argument("--p-max", type=float, required=True)
    p.add_argument("--nu-min", type=float, default=0.5)
    p.add_argument("--nu-max", type=float, default=2.5)
    p.add_argument("--fixed-nu", type=float, default=None)
    p.add_argument("--observable", default="I3")
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--bootstrap", type=int, default=0)

    p = sub.add_parser("profile", help="export entropy-vs-cut profiles")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", type=str, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "verify":
            return _verify(args)
        if args.command == "aggregate":
            pts = analysis.aggregate(args.inputs)
            analysis.write_aggregate_csv(pts, args.out)
            print(f"wrote {args.out} ({len(pts)} rows)")
            return 0
        if args.command == "crossing":
            pts = analysis.read_aggregate_csv(args.infile)
            p_star = analysis.estimate_crossing(pts, args.L1, args.L2,
                                                args.observable, args.layer)
            print(json.dumps({"p_star": p_star}))
            return 0
        if args.command == "collapse":
            pts = analysis.read_aggregate_csv(args.infile)
            fit = analysis.fit_collapse(
                pts, (args.p_min, args.p_max), (args.nu_min, args.nu_max),
                fixed_nu=args.fixed_nu, observable=args.observable,
                layer=args.layer, bootstrap=args.bootstrap)
            print(json.dumps({"p_c": fit.p_c, "nu": fit.nu, "cost": fit.cost,
                              "n_points_used": fit.n_points_used,
                              "bootstrap": fit.bootstrap}))
            return 0
        if args.command == "profile":
            pts = [pt for pt in analysis.aggregate(args.inputs)
                   if pt.observable.startswith("profile:")]
            import csv as _csv
            with open(args.out, "w", newline="") as fh:
                writer = _csv.writer(fh)
                writer.writerow(["L", "p", "layer", "x", "mean", "stderr",
                                 "count"])
                for pt in sorted(pts, key=lambda q: (q.L, q.p, q.layer,
                                                     int(q.observable.split(":")[1]))):
                    writer.writerow([pt.L, pt.p, pt.layer,
                                     pt.observable.split(":")[1],
                                     repr(pt.mean), repr(pt.stderr), pt.count])
            print(f"wrote {args.out} ({len(pts)} rows)")
            return 0
    except (ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
