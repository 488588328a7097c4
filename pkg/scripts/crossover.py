"""Bracket the arrival rate where redundancy stops helping.

Shifted-exponential service, n=4, k=1: r=4 beats r=1 at low load and loses
at saturation. Bisects on lambda until the bracket is narrower than --tol,
calling a point only when the two confidence intervals are disjoint.
"""
import argparse

from redq.config import Horizon, SystemConfig
from redq.distributions import ShiftedExponential
from redq.metrics import disjoint, summarize
from redq.simulate import run_replications
from redq.workload import Poisson


def compare(lam, args):
    cfg = SystemConfig(
        n=4, k=1, request_degree=1, service=ShiftedExponential(1.0, 1.0), arrivals=Poisson(lam),
        replications=args.replications, horizon=Horizon(args.batches), seed=args.seed,
    )
    lo = summarize(run_replications(cfg))
    hi = summarize(run_replications(cfg.with_(request_degree=args.r)))
    verdict = None
    if disjoint(lo, hi):
        verdict = "redundancy helps" if hi.mean < lo.mean else "redundancy hurts"
    print(f"lambda={lam:.4f}  r=1 {lo.mean:.4f}±{lo.ci_halfwidth:.4f}  r={args.r} {hi.mean:.4f}±{hi.ci_halfwidth:.4f}  {verdict or 'unresolved'}")
    return verdict


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--low", type=float, default=0.1)
    ap.add_argument("--high", type=float, default=0.6)
    ap.add_argument("--r", type=int, default=4)
    ap.add_argument("--tol", type=float, default=0.01)
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--batches", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    lo, hi = args.low, args.high
    if compare(lo, args) != "redundancy helps" or compare(hi, args) != "redundancy hurts":
        raise SystemExit("endpoints do not bracket a crossover")
    while hi - lo > args.tol:
        mid = (lo + hi) / 2
        v = compare(mid, args)
        if v is None:
            print("unresolved midpoint; stopping with the current bracket")
            break
        lo, hi = (mid, hi) if v == "redundancy helps" else (lo, mid)
    print(f"crossover bracket: [{lo:.4f}, {hi:.4f}]")


if __name__ == "__main__":
    main()
