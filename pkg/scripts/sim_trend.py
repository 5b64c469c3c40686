"""Decode failures and distortion of the binning scheme as the blocklength grows.

Agent 1 describes its observation losslessly and agent 2 stays silent; rates
sit a fixed margin above the first corner point.

    python scripts/sim_trend.py --blocklengths 4,6,8 --trials 5000
"""

import argparse
from pathlib import Path

from ceo_secrecy.cli import default_sim_aux
from ceo_secrecy.codesim import SimConfig, corner1_split, run_trials
from ceo_secrecy.regions import eval_inner
from ceo_secrecy.sourcefile import bundled_path, parse_source_file


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=None)
    ap.add_argument("--blocklengths", default="4,6,8")
    ap.add_argument("--margin", type=float, default=0.25, help="relative rate margin above the corner")
    ap.add_argument("--eps", type=float, default=0.375)
    ap.add_argument("--bin-slack", type=float, default=0.25, help="extra binning rate for agent 1's U layer")
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    source = parse_source_file(args.config or bundled_path())
    aux = default_sim_aux(source)
    rates = corner1_split(source, aux, args.margin)
    floor = eval_inner(source, aux).dist
    print(f"rates (R_V1, R_U1, R_V2, R_U2) = {tuple(round(r, 4) for r in rates)}; single-letter distortion {floor:.4f}")
    print(f"{'n':>3} {'failure':>9} {'+-':>7} {'distortion':>11} {'+-':>7} {'fallback':>9}")
    for n in (int(v) for v in args.blocklengths.split(",")):
        cfg = SimConfig(n, rates, args.eps, args.trials, args.seed, ((0, 0, args.bin_slack, 0), (0, 0, 0, 0)))
        s = run_trials(source, aux, cfg, keep_records=False)
        print(f"{n:3d} {s.failure_rate:9.4f} {s.failure_stderr:7.4f} {s.mean_distortion:11.4f} "
              f"{s.distortion_stderr:7.4f} {s.fallback_rate:9.4f}")


if __name__ == "__main__":
    main()
