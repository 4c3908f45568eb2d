#!/usr/bin/env python3
"""
Run the long acceptance checks one by one and write a text report.

Usage:
    python scripts/run_acceptance.py --out runs/acceptance
    python scripts/run_acceptance.py --only flow,determinism

Each check records pass/fail, wall time and the resident memory of the
process when it finished. MNIST checks are skipped when
PRIORLAB_DATA_DIR does not hold the IDX files.

Exit code is 0 when nothing failed, 2 otherwise.
"""

import argparse
import os
import sys
import time
from pathlib import Path

import psutil
from loguru import logger

from priorlab.training.acceptance import CHECKS
from priorlab.utils import formatter, initialize_logger


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    parser.add_argument("--out", default="runs/acceptance")
    parser.add_argument(
        "--only", default=None, help="Comma-separated check names"
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    initialize_logger(out / "logs")

    names = args.only.split(",") if args.only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        parser.error(f"unknown checks {unknown}; choose from {list(CHECKS)}")

    process = psutil.Process(os.getpid())
    rows = []
    for name in names:
        logger.info(f"acceptance check {name}")
        started = time.perf_counter()
        try:
            status, detail = CHECKS[name](out)
        except Exception as err:
            logger.exception(f"check {name} crashed: {err}")
            status, detail = "fail", f"crashed: {err}"
        seconds = time.perf_counter() - started
        rss = process.memory_info().rss / 2**20
        rows.append((name, status, f"{seconds:.1f}", f"{rss:.0f}", detail))

    columns = ["check", "status", "seconds", "rss_mb", "detail"]
    formatter.print_table("acceptance", columns, rows)
    report = out / "acceptance.txt"
    report.write_text(
        "\t".join(columns)
        + "\n"
        + "".join("\t".join(row) + "\n" for row in rows)
    )
    logger.info(f"report written to {report}")
    return 2 if any(row[1] == "fail" for row in rows) else 0


if __name__ == "__main__":
    sys.exit(main())
