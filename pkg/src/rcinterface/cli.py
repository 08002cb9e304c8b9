"""Command line entry point: ``rcinterface verify|sample|analyze-interface|experiment``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiments, verify
from .interface import (Interface, NotInI, check_properties, classify, decompose,
                        displacement, extract_interface, group, h_to_infinity, reconstruct)
from .lattice import Box
from .mc import ChainState


def _cmd_verify(args) -> int:
    results = verify.run_verify(args.only, inject_fault=args.inject_fault)
    bad = [r.name for r in results if not r.ok]
    print(f"{len(results) - len(bad)}/{len(results)} suites passed" + (f"; failed: {', '.join(bad)}" if bad else ""))
    return 1 if bad else 0


def _cmd_sample(args) -> int:
    if args.resume:
        st = ChainState.load(args.checkpoint)
        logging.info("resumed at sweep %d", st.sweep_count)
    else:
        if args.L is None or args.p is None:
            print("sample needs --L and --p unless resuming", file=sys.stderr)
            return 2
        M = args.M if args.M is not None else args.L
        if args.L < 0 or M < 1:
            print("need L >= 0 and M >= 1", file=sys.stderr)
            return 2
        st = ChainState(Box(args.L, M), args.p, args.q, args.seed)
    todo = args.sweeps
    step = args.checkpoint_every or todo
    while todo > 0:
        k = min(step, todo)
        st.run(k)
        todo -= k
        if args.checkpoint:
            st.save(args.checkpoint)
    delta = extract_interface(st.omega)
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(delta.to_json(st.box))
    print(json.dumps({"L": st.box.L, "M": st.box.M, "p": st.p, "q": st.q, "seed": st.seed,
                      "sweep": st.sweep_count, "open_edges": int(st.bits.sum()),
                      "interface_extra": len(delta.extra), "interface_missing": len(delta.missing)}))
    return 0


def analyze(delta: Interface, box: Box | None = None) -> dict:
    """Summary of the wall structure of one interface."""
    cl = classify(delta)
    fam = decompose(delta, box.L if box else None)
    groups = group(fam)
    out = {
        "plaquettes_off_plane": len(delta.extra),
        "cells_off_plane": len(delta.missing),
        "ceilings": len(cl.ceilings),
        "walls": [{"origin": list(S.origin), "N": S.N, "pi": len(S.pi), "Pi": S.Pi, "D": S.D}
                  for S in sorted(fam.walls.values(), key=lambda S: S.origin)],
        "groups": [{"origin": list(o), "walls": len(g.walls), "Pi": g.Pi}
                   for o, g in sorted(groups.items())],
        "Pi_total": fam.Pi,
        "displacement_origin": displacement((0, 0), delta),
        "property_failures": check_properties(delta, cl),
        "round_trip": reconstruct(fam) == delta,
    }
    if box is not None:
        out["h_to_infinity_origin"] = h_to_infinity(delta, (0, 0), box.L)
    return out


def _cmd_analyze(args) -> int:
    with open(args.dump) as fh:
        delta, box = Interface.from_json(fh.read())
    info = analyze(delta, box)
    print(json.dumps(info, indent=2))
    return 0 if info["round_trip"] and not info["property_failures"] else 1


def _cmd_experiment(args) -> int:
    if args.show_config:
        print(json.dumps(experiments.DEFAULTS[args.kind], indent=2))
        return 0
    config = experiments.load_config(args.config) if args.config else {}
    spec = experiments.ExperimentSpec.from_config(args.kind, config, args.seed)
    rows = experiments.run_experiment(spec)
    text = experiments.to_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rcinterface", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--only", nargs="+", choices=list(verify.SUITES), metavar="SUITE")
    v.add_argument("--inject-fault", action="store_true",
                   help="corrupt one stored interface so the round-trip check must fail")
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("sample", help="run the conditioned chain, with checkpoints")
    s.add_argument("--L", type=int)
    s.add_argument("--M", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sweeps", type=int, default=1000)
    s.add_argument("--checkpoint", help="checkpoint file written after each block")
    s.add_argument("--checkpoint-every", type=int, default=0)
    s.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    s.add_argument("--dump", help="write the final interface as JSON")
    s.set_defaults(func=_cmd_sample)

    a = sub.add_parser("analyze-interface", help="wall structure of a dumped interface")
    a.add_argument("dump")
    a.set_defaults(func=_cmd_analyze)

    e = sub.add_parser("experiment", help="Monte Carlo experiments written as CSV")
    e.add_argument("kind", choices=experiments.KINDS)
    e.add_argument("--config")
    e.add_argument("--out")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--show-config", action="store_true")
    e.set_defaults(func=_cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "sample" and args.resume and not args.checkpoint:
        print("--resume needs --checkpoint", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, NotInI) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
