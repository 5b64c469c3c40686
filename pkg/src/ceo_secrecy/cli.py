"""Command-line front end: ``ceo-secrecy {gaussian,discrete,simulate,verify}``.

Exit codes: 0 success, 1 a verification suite failed, 2 infeasible or invalid
input, 3 enumeration cap exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from . import codesim, gaussian, search
from .errors import CardinalityError, DimensionMismatch, EnumerationCapExceeded, InfeasibleDistortion
from .probcore import SourceSpec, constant_channel, entropy, identity_channel
from .regions import AuxConfig, best_xhat
from .sourcefile import (
    SourceFormatError,
    atomic_write,
    aux_from_dict,
    bundled_path,
    csv_text,
    file_sha256,
    header_lines,
    json_text,
    parse_source_file,
    text_sha256,
    TOOL_NAME,
    TOOL_VERSION,
)
from .suites import SUITES, run_suite

EXIT_OK, EXIT_SUITE, EXIT_INFEASIBLE, EXIT_CAP, EXIT_USAGE = 0, 1, 2, 3, 64

log = logging.getLogger("ceo_secrecy")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def _floats(text: str, count=None) -> list:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) not in (count if isinstance(count, tuple) else (count,)):
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {len(vals)}")
    return vals


def _ints(text: str, count: int) -> list:
    vals = _floats(text, count)
    if any(v != int(v) or v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected {count} positive integers, got {text!r}")
    return [int(v) for v in vals]


def _nonempty(text: str) -> str:
    if not text:
        raise argparse.ArgumentTypeError("must not be empty")
    return text


def build_parser() -> Parser:
    p = Parser(prog=TOOL_NAME, description="Rate-distortion-equivocation bounds for the two-agent CEO problem.")
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    g = sub.add_parser("gaussian", help="sweep the quadratic Gaussian region")
    g.add_argument("--var-x", type=float, required=True)
    g.add_argument("--var-n1", type=float, required=True)
    g.add_argument("--var-n2", type=float, required=True)
    g.add_argument("--var-ne", type=float, default=math.inf,
                   help="variance of Eve's side-information noise (omit for no side information)")
    g.add_argument("--distortion", type=float, required=True)
    g.add_argument("--grid", type=int, default=50)
    g.add_argument("--r-max", type=float, default=4.0)
    g.add_argument("--out", type=Path, required=True)

    d = sub.add_parser("discrete", help="trace an inner or outer frontier for a discrete source")
    d.add_argument("--config", type=Path, default=None, help="source JSON (default: bundled binary fixture)")
    d.add_argument("--mode", choices=("inner", "outer"), default="inner")
    d.add_argument("--axes", default="Delta1,R2")
    d.add_argument("--budget", type=lambda t: _ints(t, 2), default=[4, 200], help="restarts,refine_iters")
    d.add_argument("--grid", type=int, default=9)
    d.add_argument("--cards", type=lambda t: _ints(t, 4), default=None, help="|U1|,|U2|,|V1|,|V2|")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", type=Path, required=True, help="CSV path; provenance goes next to it as .json")

    s = sub.add_parser("simulate", help="simulate the binning scheme at blocklength n")
    s.add_argument("--config", type=Path, default=None)
    s.add_argument("--aux", type=Path, default=None, help="aux JSON (default: U1 = Y1, everything else constant)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rates", type=lambda t: _floats(t, 4), default=None,
                   help="R_V1,R_U1,R_V2,R_U2 (default: first corner point plus 25%%)")
    s.add_argument("--eps", type=float, default=0.15, help="typicality slack")
    s.add_argument("--slack", type=lambda t: _floats(t, (4, 8)), default=[0.0] * 4,
                   help="eps1..eps4, or eight values for per-agent margins")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--equivocation", action="store_true")
    s.add_argument("--out", type=Path, default=None)

    v = sub.add_parser("verify", help="run cross-module identity suites")
    v.add_argument("--suite", type=_nonempty, choices=("all",) + SUITES, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--draws", type=int, default=1000)
    v.add_argument("--out", type=Path, default=None)
    return p


def _meta(cmdline: str, seed, source_hash) -> dict:
    return {"tool": f"{TOOL_NAME} {TOOL_VERSION}", "command": cmdline, "seed": seed,
            "source_sha256": source_hash or "none"}


def _load_source(path):
    path = bundled_path() if path is None else path
    return parse_source_file(path), file_sha256(path)


def default_sim_aux(source: SourceSpec) -> AuxConfig:
    """Agent 1 describes its observation exactly; agent 2 and both V layers stay silent."""
    s = source.sizes
    pu1, pu2 = identity_channel(s["Y1"]), constant_channel(s["Y2"])
    return AuxConfig(pu1, pu2, constant_channel(s["Y1"]), constant_channel(1), best_xhat(source, pu1, pu2))


def cmd_gaussian(args, cmdline: str) -> int:
    params = gaussian.GaussianParams(args.var_x, args.var_n1, args.var_n2, args.var_ne)
    try:
        rows = gaussian.boundary_sweep(params, args.distortion, args.grid, args.r_max)
    except InfeasibleDistortion as e:
        print(f"infeasible: {e} (limit at infinite rates: {params.limit_distortion():.17g})", file=sys.stderr)
        return EXIT_INFEASIBLE
    canon = json.dumps({"var_x": args.var_x, "var_n1": args.var_n1, "var_n2": args.var_n2,
                        "var_ne": None if math.isinf(args.var_ne) else args.var_ne}, sort_keys=True)
    head = header_lines(cmdline, "none", text_sha256(canon)) + [f"distortion: {args.distortion:.17g}"]
    atomic_write(args.out, csv_text(head, gaussian.CSV_COLUMNS, [r.as_row() for r in rows]))
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_discrete(args, cmdline: str) -> int:
    source, sha = _load_source(args.config)
    budget = search.SearchBudget(args.budget[0], args.budget[1], 0.3, args.seed)
    axes = tuple(a.strip() for a in args.axes.split(","))
    cards = None if args.cards is None else dict(zip(("U1", "U2", "V1", "V2"), args.cards))
    fr = search.trace_frontier(source, axes, args.grid, budget, cards, args.mode)
    head = header_lines(cmdline, args.seed, sha) + [f"mode: {args.mode}", f"axes: {','.join(axes)}"]
    cols = ("R1", "R2", "Delta1", "Delta2", "D", "config_id")
    out_json = args.out.with_suffix(".json")
    atomic_write(args.out, csv_text(head, cols, fr.csv_rows()))
    atomic_write(out_json, json_text(_meta(cmdline, args.seed, sha), fr.provenance()))
    print(f"wrote {len(fr.points)} points ({len(fr.hull)} on the hull) to {args.out} and {out_json}")
    return EXIT_OK


def cmd_simulate(args, cmdline: str) -> int:
    source, sha = _load_source(args.config)
    if args.aux is not None:
        aux = aux_from_dict(json.loads(args.aux.read_text()))
    else:
        aux = default_sim_aux(source)
    rates = tuple(args.rates) if args.rates is not None else codesim.corner1_split(source, aux, 0.25)
    slack = tuple(args.slack) if len(args.slack) == 4 else (tuple(args.slack[:4]), tuple(args.slack[4:]))
    cfg = codesim.SimConfig(args.n, rates, args.eps, args.trials, args.seed, slack)
    sizes = codesim.codebook_sizes(source, aux, cfg)
    if args.equivocation:
        # refuse before any codebook is drawn
        cap = codesim.enumeration_cap()
        for k in (1, 2):
            cost = codesim.enumeration_cost(source, cfg.n, k, sizes[k - 1])
            if cost > cap:
                raise EnumerationCapExceeded(f"exact equivocation would cost {cost}, above the cap {cap}", cost, cap)
    code = codesim.gen_code(source, aux, cfg)
    summary = codesim.run_trials(source, aux, cfg, code, keep_records=False)
    body = {
        "config": {"n": cfg.n, "rates": list(rates), "eps": cfg.eps, "slack": np.asarray(slack).tolist(),
                   "trials": cfg.trials, "aux": aux.to_dict()},
        "codebooks": [dict(zip(("N_V", "N_U", "bins_V", "bins_U"), s)) for s in
                      sizes],
        "summary": summary.as_dict() if cfg.trials else None,
    }
    if args.equivocation:
        hxe = entropy(source.joint(), "X", "E")
        body["equivocation"] = {
            "H_X_given_E": hxe,
            "agent1": codesim.exact_equivocation(source, code, 1, cfg),
            "agent2": codesim.exact_equivocation(source, code, 2, cfg),
            "lemma1": [vars(codesim.lemma1_check(source, code, cfg, k, aux=aux)) for k in (1, 2)],
        }
    text = json_text(_meta(cmdline, args.seed, sha), body)
    if args.out is None:
        sys.stdout.write(text)
    else:
        atomic_write(args.out, text)
        print(f"wrote simulation summary to {args.out}")
    return EXIT_OK


def cmd_verify(args, cmdline: str) -> int:
    results = run_suite(args.suite, args.seed, args.draws)
    ok = all(r.passed for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: max deviation {r.max_deviation:.3e} "
              f"(tolerance {r.tolerance:.0e}, {r.cases} cases)")
    if args.out is not None:
        atomic_write(args.out, json_text(_meta(cmdline, args.seed, None),
                                         {"suite": args.suite, "passed": ok,
                                          "results": [r.as_dict() for r in results]}))
    return EXIT_OK if ok else EXIT_SUITE


COMMANDS = {"gaussian": cmd_gaussian, "discrete": cmd_discrete, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as e:          # --help / --version
        return int(e.code or 0)
    cmdline = shlex.join([TOOL_NAME] + argv)
    try:
        return COMMANDS[args.command](args, cmdline)
    except EnumerationCapExceeded as e:
        print(f"resource cap: {e}; set {codesim.CAP_ENV} to raise it", file=sys.stderr)
        return EXIT_CAP
    except (SourceFormatError, CardinalityError, DimensionMismatch, InfeasibleDistortion) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
