"""Replication statistics, occupancy dominance and policy sweeps."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import InsufficientReplications

A_DOMINATES_B = "ADominatesB"
B_DOMINATES_A = "BDominatesA"
INCOMPARABLE = "Incomparable"

RESULTS_COLUMNS = ["r", "regime", "lambda", "mean_latency", "ci_halfwidth", "throughput", "replications", "seed"]


@dataclass
class LatencyStats:
    count: int  # measured departures, summed over replications
    mean: float
    variance: float  # across replication means
    ci_halfwidth: float | None  # None when fewer than two replications
    throughput: float
    replications: int
    replication_means: list = field(default_factory=list)
    occupancy_ccdf: np.ndarray | None = field(default=None, repr=False)
    latencies: np.ndarray | None = field(default=None, repr=False)

    @property
    def ci(self):
        if self.ci_halfwidth is None:
            return None
        return (self.mean - self.ci_halfwidth, self.mean + self.ci_halfwidth)


def t_halfwidth(values: Sequence[float], level: float = 0.95) -> float:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        raise InsufficientReplications(f"a confidence interval needs >= 2 replications, got {len(x)}")
    s = x.std(ddof=1)
    return float(stats.t.ppf(0.5 + level / 2, len(x) - 1) * s / math.sqrt(len(x)))


def summarize(results: Iterable, keep_latencies: bool = False) -> LatencyStats:
    """Pool replications: mean of replication means, Student-t 95% CI.

    Accepts :class:`~redq.simulate.RunResult` objects or bare numbers (taken
    as replication means).
    """
    results = list(results)
    if not results:
        raise InsufficientReplications("no replications to summarize")
    means, tputs, counts = [], [], 0
    occ = None
    lats = []
    for res in results:
        if isinstance(res, (int, float, np.floating)):
            means.append(float(res))
            continue
        means.append(res.mean_latency)
        tputs.append(res.throughput)
        counts += res.measured
        t = np.asarray(res.occupancy_time, dtype=float)
        if occ is None:
            occ = t.copy()
        else:
            if len(t) > len(occ):
                occ = np.pad(occ, (0, len(t) - len(occ)))
            occ[: len(t)] += t
        if keep_latencies:
            lats.append(res.latencies)
    mean = float(np.mean(means))
    var = float(np.var(means, ddof=1)) if len(means) > 1 else 0.0
    try:
        hw = t_halfwidth(means)
    except InsufficientReplications:
        hw = None
    ccdf = None
    if occ is not None and occ.sum() > 0:
        ccdf = ccdf_from_times(occ)
    return LatencyStats(
        count=counts,
        mean=mean,
        variance=var,
        ci_halfwidth=hw,
        throughput=float(np.mean(tputs)) if tputs else float("nan"),
        replications=len(means),
        replication_means=means,
        occupancy_ccdf=ccdf,
        latencies=np.concatenate(lats) if lats else None,
    )


def ccdf_from_times(occupancy_time) -> np.ndarray:
    t = np.asarray(occupancy_time, dtype=float)
    return np.clip(1.0 - np.cumsum(t / t.sum()), 0.0, 1.0)


def dominance_check(ccdf_a, ccdf_b, slack: float = 0.01) -> str:
    """Pointwise comparison of two complementary CDFs on 0, 1, 2, ...

    A dominates B when ``a[x] >= b[x] - slack`` everywhere and
    ``a[x] > b[x] + slack`` somewhere. Shorter arrays are padded with zeros.
    """
    a = np.asarray(ccdf_a, dtype=float)
    b = np.asarray(ccdf_b, dtype=float)
    size = max(len(a), len(b))
    a = np.pad(a, (0, size - len(a)))
    b = np.pad(b, (0, size - len(b)))
    diff = a - b
    if np.all(diff >= -slack) and np.any(diff > slack):
        return A_DOMINATES_B
    if np.all(diff <= slack) and np.any(diff < -slack):
        return B_DOMINATES_A
    return INCOMPARABLE


def disjoint(a: LatencyStats, b: LatencyStats) -> bool:
    if a.ci_halfwidth is None or b.ci_halfwidth is None:
        return False
    lo, hi = sorted([a, b], key=lambda s: s.mean)
    return lo.mean + lo.ci_halfwidth < hi.mean - hi.ci_halfwidth


def little_gap(result, arrival_rate: float) -> float:
    """Relative gap between time-averaged occupancy and rate x mean latency.

    Uses every departure of the run, warm-up included, so both sides cover
    the same window.
    """
    lam_w = arrival_rate * float(np.mean(result.all_latencies))
    return abs(result.mean_occupancy - lam_w) / lam_w


@dataclass
class PolicyRow:
    r: int
    regime: str
    rate: float | None
    stats: LatencyStats

    @property
    def mean(self):
        return self.stats.mean

    @property
    def ci_halfwidth(self):
        return self.stats.ci_halfwidth


def regime_label(config) -> str:
    base = "open" if config.open else "saturated"
    return f"{base}:{config.buffer_mode}"


def compare_policies(config, degrees: Sequence[int], regime=None, replications: int | None = None, **run_kwargs) -> list[PolicyRow]:
    """One row per request degree, sharing arrival seeds across rows."""
    from .simulate import run_replications

    if regime is not None:
        if regime == "open":
            config = config.with_(regime=None)
        else:
            from .workload import NoArrivals

            config = config.with_(regime=regime, arrivals=NoArrivals())
    rows = []
    for r in degrees:
        cfg = config.with_(request_degree=r)
        results = run_replications(cfg, replications, **run_kwargs)
        rows.append(PolicyRow(r, regime_label(cfg), cfg.arrival_rate, summarize(results)))
    return rows


def _num(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x)) if isinstance(x, float) else str(x)


def results_rows(rows: Sequence[PolicyRow], seed: int) -> list[list[str]]:
    return [
        [
            str(row.r),
            row.regime,
            _num(row.rate),
            _num(row.stats.mean),
            _num(row.stats.ci_halfwidth),
            _num(row.stats.throughput),
            str(row.stats.replications),
            str(seed),
        ]
        for row in rows
    ]


def write_results_csv(rows: Sequence[PolicyRow], seed: int, out=None, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_COLUMNS)
    w.writerows(results_rows(rows, seed))
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
