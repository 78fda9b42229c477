"""Closed forms vs the GN quadrature oracle on random links.

    python scripts/run_link_study.py                      # desk scale, about 10 s
    python scripts/run_link_study.py --full --threads 8   # 510 samples, 60 channels
"""

import argparse
import sys
from pathlib import Path

from qotbench.cli import main as cli_main

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true", help="use the full-size sample counts")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-dir", default="results/link_study")
    args = ap.parse_args()
    cfg = HERE / "configs" / ("link_study_full.json" if args.full else "link_study_desk.json")
    return cli_main(["link-study", "--config", str(cfg), "--out-dir", args.out_dir, "--threads", str(args.threads)])


if __name__ == "__main__":
    sys.exit(main())
