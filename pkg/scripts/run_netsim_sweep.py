"""Blocking probability and arrival GSNR over an OTL sweep on both topologies.

Prints a per-(topology, variant, OTL) summary averaged over seeds after the
CSV is written.
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

from qotbench.cli import main as cli_main

HERE = Path(__file__).resolve().parent


def summarize(csv_path):
    acc = defaultdict(list)
    with open(csv_path) as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for r in rows:
            usage = [int(r[f"mfl_{i}"]) for i in range(1, 7)]
            share64 = usage[5] / max(sum(usage), 1)
            acc[(r["topology"], r["variant"], int(r["otl"]))].append(
                (float(r["bbp"]), float(r["mean_gsnr_db"]), share64))
    print(f"{'topo':<5} {'variant':<8} {'otl':>4} {'bbp':>8} {'gsnr_dB':>8} {'64QAM':>6}")
    for (t, v, o), vals in sorted(acc.items()):
        n = len(vals)
        b, g, s = (sum(x[i] for x in vals) / n for i in range(3))
        print(f"{t:<5} {v:<8} {o:>4} {b:>8.4f} {g:>8.3f} {s:>6.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true", help="1e5 requests, 5 seeds, 8 OTL points")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", default="results/netsim")
    args = ap.parse_args()
    cfg = HERE / "configs" / ("netsim_full.json" if args.full else "netsim_desk.json")
    rc = cli_main(["netsim", "--config", str(cfg), "--out-dir", args.out_dir, "--threads", str(args.threads)])
    if rc == 0:
        summarize(Path(args.out_dir) / "netsim.csv")
    return rc


if __name__ == "__main__":
    sys.exit(main())
