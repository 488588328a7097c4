"""Named experiment presets producing results CSVs.

Presets report orderings between request degrees, with common
arrival seeds across degrees. Every preset is a pure function of its name,
seed and scale overrides, so reruns are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .config import Horizon, SystemConfig
from .distributions import Constant, Exponential, MixtureExponential, ShiftedExponential
from .metrics import PolicyRow, regime_label, summarize, write_results_csv
from .simulate import run_replications
from .workload import NoArrivals, Poisson, Saturated

HYPEREXP = MixtureExponential(((0.2, 0.1), (0.8, 1.0)))
SHIFTED = ShiftedExponential(1.0, 1.0)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    base: SystemConfig
    degrees: tuple[int, ...]
    lambdas: tuple[float, ...] = ()
    backlog: int | None = None  # adds a saturated point when set
    modes: tuple[str, ...] = ("central",)
    open_modes: tuple[str, ...] | None = None  # defaults to ``modes``
    replications: int = 5
    batches: int = 10_000
    notes: str = field(default="", compare=False)

    def points(self, replications=None, batches=None, backlog=None):
        """Yield one config per sweep point, in output order; callers set the degree."""
        reps = replications or self.replications
        horizon = Horizon(batches=batches or self.batches)
        backlog = backlog or self.backlog
        open_modes = self.modes if self.open_modes is None else self.open_modes
        for mode in self.modes:
            if mode in open_modes:
                for lam in self.lambdas:
                    yield self.base.with_(
                        buffer_mode=mode, arrivals=Poisson(lam), regime=None,
                        replications=reps, horizon=horizon,
                    )
            if backlog:
                yield self.base.with_(
                    buffer_mode=mode, arrivals=NoArrivals(), regime=Saturated(backlog),
                    replications=reps, horizon=horizon,
                )


def _base(n, k, service, r, removal=None, m=None):
    return SystemConfig(
        n=n, k=k, request_degree=r, service=service,
        removal=removal if removal is not None else Constant(0.0), m=m,
    )


PRESETS = {
    p.name: p
    for p in [
        ExperimentPreset(
            "fig3", _base(10, 5, Exponential(1.0), 10), degrees=(5, 6, 8, 10),
            lambdas=(0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 1.9),
            notes="latency non-increasing in r at every arrival rate",
        ),
        ExperimentPreset(
            "fig4", _base(4, 1, HYPEREXP, 4), degrees=(1, 2, 3, 4),
            lambdas=(0.2, 0.4, 0.6, 0.8, 1.0, 1.2),
            notes="heavy-everywhere service: r=4 best",
        ),
        ExperimentPreset(
            "fig5", _base(4, 1, SHIFTED, 4), degrees=(1, 2, 3, 4),
            lambdas=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), backlog=10_000,
            notes="light-everywhere service: redundancy helps at low load, hurts at saturation",
        ),
        ExperimentPreset(
            "fig6", _base(4, 1, Exponential(1.0), 4, removal=Exponential(10.0)), degrees=(1, 2, 3, 4),
            lambdas=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0), backlog=10_000,
            notes="memoryless service with exp(10) removal cost",
        ),
        ExperimentPreset(
            "fig8", _base(20, 5, Exponential(1.0), 10, m=10), degrees=(5, 7, 10),
            lambdas=(0.5, 1.0, 1.5, 2.0, 2.5),
            notes="n=20, each batch eligible on a uniform m=10 subset",
        ),
        ExperimentPreset(
            "thm3", _base(4, 1, HYPEREXP, 4), degrees=(1, 2, 3, 4), backlog=10_000,
            modes=("central", "distributed"), replications=10,
            notes="heavy-everywhere at 100% utilization: r=n minimal",
        ),
        ExperimentPreset(
            "thm4", _base(4, 1, SHIFTED, 4), degrees=(1, 2, 3, 4), lambdas=(0.2,), backlog=10_000,
            modes=("central", "distributed"), open_modes=("central",), replications=10,
            notes="light-everywhere at 100% utilization: r=1 minimal; reversed at lambda=0.2",
        ),
        ExperimentPreset(
            "thm5", _base(4, 1, Exponential(1.0), 4, removal=Exponential(10.0)), degrees=(1, 2, 3, 4),
            backlog=10_000, modes=("central", "distributed"), replications=10,
            notes="removal cost at 100% utilization: r=1 minimal",
        ),
    ]
}


def preset_rows(name: str, seed: int = 0, replications=None, batches=None, backlog=None) -> list[PolicyRow]:
    preset = get_preset(name)
    rows = []
    for cfg in preset.points(replications, batches, backlog):
        cfg = cfg.with_(seed=seed)
        for r in preset.degrees:
            c = cfg.with_(request_degree=r)
            rows.append(PolicyRow(r, regime_label(c), c.arrival_rate, summarize(run_replications(c))))
    return rows


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def run_preset(name: str, seed: int = 0, out=None, replications=None, batches=None, backlog=None) -> str:
    """Run a preset and return (and optionally write) its results CSV."""
    preset = get_preset(name)
    resolved = preset.base.with_(
        seed=seed,
        replications=replications or preset.replications,
        horizon=Horizon(batches=batches or preset.batches),
    )
    header = [
        f"preset: {preset.name}",
        "config: " + json.dumps(resolved.to_dict(), sort_keys=True),
        "sweep: " + json.dumps(
            {
                "degrees": list(preset.degrees),
                "lambdas": list(preset.lambdas),
                "saturated_backlog": backlog or preset.backlog,
                "modes": list(preset.modes),
            },
            sort_keys=True,
        ),
    ]
    rows = preset_rows(name, seed, replications, batches, backlog)
    return write_results_csv(rows, seed, out, header)
