"""Maximum reach in 80 km spans per model and format, with the deviation report.

    python scripts/reach_table.py [--nf-offset-db 3]
"""

import argparse
import sys

from qotbench.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nf-offset-db", default="0")
    ap.add_argument("--out-dir", default="results/reach")
    args = ap.parse_args()
    return cli_main(["reach-table", "--out-dir", args.out_dir, "--nf-offset-db", args.nf_offset_db])


if __name__ == "__main__":
    sys.exit(main())
