"""Command-line harness: mms | island | stability | trace.

Defaults come from a flat INI config file (one section per experiment);
flags of the same names override config values.  Exits nonzero when any
stability audit fails.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import fields as dc_fields

from .harness import (ExperimentConfig, run_island_self_convergence,
                      run_mms_experiment, run_stability_audit, run_trace)


def _parse_tuple(text, cast):
    return tuple(cast(tok) for tok in str(text).replace(";", ",").split(",")
                 if tok.strip())


def _config_from_sources(kind: str, args) -> ExperimentConfig:
    values = {"kind": kind}
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_file(fh)
        if parser.has_section(kind):
            for key, val in parser.items(kind):
                values[key] = val
    for key in ("orders", "gammas", "n_list", "kappa_par", "kperp",
                "reference_n", "t_final", "island_t_final", "alpha_pack",
                "substeps", "delta", "r1", "out_dir", "cg_rel_tol"):
        arg = getattr(args, key, None)
        if arg is not None:
            values[key] = arg

    casts = {"orders": lambda v: _parse_tuple(v, int),
             "gammas": lambda v: _parse_tuple(v, float),
             "n_list": lambda v: _parse_tuple(v, int),
             "kappa_par": lambda v: _parse_tuple(v, float)}
    typed = {}
    for f in dc_fields(ExperimentConfig):
        if f.name not in values:
            continue
        raw = values[f.name]
        if f.name in casts:
            typed[f.name] = casts[f.name](raw) if isinstance(raw, str) else tuple(raw)
        elif f.name in ("kind", "out_dir"):
            typed[f.name] = str(raw)
        elif f.name in ("reference_n", "substeps"):
            typed[f.name] = int(raw)
        else:
            typed[f.name] = float(raw)
    return ExperimentConfig(**typed)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="anisoheat",
                                 description="anisotropic diffusion experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI config file with per-experiment sections")
        p.add_argument("--order", dest="orders",
                       help="comma list of SBP orders, e.g. 2,4")
        p.add_argument("--gamma", dest="gammas",
                       help="comma list of dilations, e.g. 0,0.1")
        p.add_argument("--kappa-par", dest="kappa_par",
                       help="comma list of parallel diffusivities")
        p.add_argument("--n-list", dest="n_list",
                       help="comma list of per-block resolutions")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--kperp", type=float)
        p.add_argument("--reference-n", dest="reference_n", type=int)
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--island-t-final", dest="island_t_final", type=float)
        p.add_argument("--alpha-pack", dest="alpha_pack", type=float)
        p.add_argument("--substeps", type=int)
        p.add_argument("--delta", type=float)
        p.add_argument("--r1", type=float)
        p.add_argument("--cg-rel-tol", dest="cg_rel_tol", type=float)

    for name in ("mms", "island", "stability", "trace"):
        add_common(sub.add_parser(name))
    sub.choices["stability"].add_argument("--negative-control",
                                          action="store_true")

    args = ap.parse_args(argv)
    cfg = _config_from_sources(args.command, args)

    if args.command == "mms":
        run_mms_experiment(cfg)
        return 0
    if args.command == "island":
        run_island_self_convergence(cfg)
        return 0
    if args.command == "stability":
        _rows, all_ok = run_stability_audit(
            cfg, negative_control=args.negative_control)
        return 0 if all_ok else 1
    if args.command == "trace":
        run_trace(cfg)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
