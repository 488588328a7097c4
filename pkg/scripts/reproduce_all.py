"""Run every experiment preset and write one CSV per preset.

    python scripts/reproduce_all.py --out results --seed 0
"""
import argparse
import time
from pathlib import Path

from redq.experiments import PRESETS, run_preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--replications", type=int)
    ap.add_argument("--batches", type=int)
    ap.add_argument("--only", nargs="*", choices=sorted(PRESETS))
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or sorted(PRESETS):
        t0 = time.perf_counter()
        with open(out / f"{name}.csv", "w", newline="") as fh:
            run_preset(name, args.seed, fh, args.replications, args.batches)
        print(f"{name}: {time.perf_counter() - t0:.1f}s -> {out / (name + '.csv')}")


if __name__ == "__main__":
    main()
