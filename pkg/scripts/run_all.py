"""Run every experiment config in configs/ through the CLI and write plots where they make sense."""
import argparse
import sys
import time
from pathlib import Path

from unidym.cli import main

PLOTS = {
    "cos-bound-sweep": "margin-histogram",
    "sinh-bound-sweep": "margin-histogram",
    "theorem-b-census": "census-vs-parameter",
    "rho-envelope": "rho-envelope",
}


def run(configs, out, skip):
    worst = 0
    for cfg in sorted(configs):
        exp = cfg.stem
        if exp in skip:
            continue
        argv = [exp, "--config", str(cfg), "--out", str(out)]
        if exp in PLOTS:
            argv += ["--plot", PLOTS[exp]]
        t = time.perf_counter()
        code = main(argv)
        print(f"  [{exp}] exit {code} in {time.perf_counter() - t:.1f}s")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", default=str(root / "configs"))
    ap.add_argument("--out", default=str(root / "results"))
    ap.add_argument("--skip", nargs="*", default=[], help="experiment ids to leave out, e.g. theorem-b-census")
    a = ap.parse_args()
    sys.exit(run(Path(a.configs).glob("*.cfg"), Path(a.out), set(a.skip)))
