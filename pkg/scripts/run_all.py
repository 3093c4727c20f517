"""Run every shipped config and print a one-line verdict per experiment."""

import argparse
import io
import pathlib
import sys
import time

from detlab import cli

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default=str(ROOT / "reports"))
    ap.add_argument("--level", type=int)
    args = ap.parse_args()
    worst = 0
    for path in sorted(pathlib.Path(args.configs).glob("*.toml")):
        log = io.StringIO()
        start = time.perf_counter()
        code = cli.run(str(path), level=args.level, out_dir=args.out, stream=log)
        worst = max(worst, code)
        fails = [line for line in log.getvalue().splitlines() if line.startswith("FAIL")]
        verdict = {0: "ok", 1: "config error", 2: f"{len(fails)} failed"}[code]
        print(f"{path.stem:<12} {verdict:<14} {time.perf_counter() - start:6.2f}s")
        for line in fails:
            print("    " + line)
    return worst


if __name__ == "__main__":
    sys.exit(main())
