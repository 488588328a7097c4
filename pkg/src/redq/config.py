"""System configuration: JSON loading, validation and round-tripping."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .distributions import Constant, Distribution, parse_distribution
from .errors import ConfigError, ParseError, ValidationError
from .workload import (
    ArrivalProcess,
    Fixed,
    NoArrivals,
    PerBatchList,
    Saturated,
    make_degree_policy,
    parse_arrivals,
    parse_regime,
)

BUFFER_MODES = ("central", "distributed")
DISPATCH_POLICIES = ("least-loaded", "uniform-random", "round-robin")
CONFIG_KEYS = (
    "n", "k", "request_degree", "buffer_mode", "service", "removal", "arrivals",
    "regime", "m", "seed", "replications", "horizon", "dispatch",
)


@dataclass(frozen=True)
class Horizon:
    """Stop after ``batches`` departures, or at simulated time ``time``."""

    batches: int | None = 100_000
    time: float | None = None

    def __post_init__(self):
        if (self.batches is None) == (self.time is None):
            raise ValidationError("exactly one of batches/time must be set", key="horizon")
        if self.batches is not None and self.batches < 1:
            raise ValidationError("batch horizon must be >= 1", key="horizon")
        if self.time is not None and not self.time > 0:
            raise ValidationError("time horizon must be positive", key="horizon")

    def to_json(self):
        return {"batches": self.batches} if self.batches is not None else {"time": self.time}

    @classmethod
    def from_json(cls, value):
        if isinstance(value, Horizon):
            return value
        if isinstance(value, bool):
            raise ParseError("expected an integer or an object", key="horizon")
        if isinstance(value, int):
            return cls(batches=value)
        if isinstance(value, dict) and set(value) == {"batches"}:
            return cls(batches=int(value["batches"]))
        if isinstance(value, dict) and set(value) == {"time"}:
            return cls(batches=None, time=float(value["time"]))
        raise ParseError('expected N, {"batches": N} or {"time": T}', key="horizon")


@dataclass(frozen=True)
class SystemConfig:
    n: int
    k: int
    request_degree: Fixed | PerBatchList
    service: Distribution
    buffer_mode: str = "central"
    removal: Distribution = field(default_factory=lambda: Constant(0.0))
    arrivals: ArrivalProcess = field(default_factory=NoArrivals)
    regime: Saturated | None = None  # None means open
    m: int | None = None
    seed: int = 0
    replications: int = 5
    horizon: Horizon = field(default_factory=Horizon)
    dispatch: str = "least-loaded"

    def __post_init__(self):
        object.__setattr__(self, "request_degree", make_degree_policy(self.request_degree))
        if self.m is not None and self.m == self.n:
            object.__setattr__(self, "m", None)
        self.validate()

    def validate(self):
        if self.k < 1:
            raise ValidationError("k must be at least 1", key="k")
        if self.n < self.k:
            raise ValidationError("k exceeds n", key="k")
        if self.m is not None and not self.k <= self.m <= self.n:
            raise ValidationError(f"eligible-set size must satisfy k <= m <= n, got {self.m}", key="m")
        limit = self.m if self.m is not None else self.n
        for r in self.request_degree.values():
            if r < self.k:
                raise ValidationError(f"request degree {r} is below k={self.k}", key="request_degree")
            if r > limit:
                what = "request degree exceeds eligible set" if self.m is not None else "request degree exceeds n"
                raise ValidationError(f"{what} ({r} > {limit})", key="request_degree")
        if self.buffer_mode not in BUFFER_MODES:
            raise ValidationError(f"buffer_mode must be one of {BUFFER_MODES}", key="buffer_mode")
        if self.dispatch not in DISPATCH_POLICIES:
            raise ValidationError(f"dispatch must be one of {DISPATCH_POLICIES}", key="dispatch")
        if self.regime is not None and not isinstance(self.arrivals, NoArrivals):
            raise ValidationError("saturated regime takes no arrival process", key="arrivals")
        if self.replications < 1:
            raise ValidationError("replications must be >= 1", key="replications")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer", key="seed")

    @property
    def open(self) -> bool:
        return self.regime is None

    @property
    def arrival_rate(self) -> float | None:
        return self.arrivals.rate if self.open else None

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "request_degree": self.request_degree.to_json(),
            "buffer_mode": self.buffer_mode,
            "service": self.service.spec(),
            "removal": self.removal.spec(),
            "arrivals": self.arrivals.spec(),
            "regime": "open" if self.regime is None else self.regime.spec(),
            "m": self.m,
            "seed": self.seed,
            "replications": self.replications,
            "horizon": self.horizon.to_json(),
            "dispatch": self.dispatch,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "SystemConfig":
        if not isinstance(data, dict):
            raise ParseError("config must be a JSON object")
        unknown = sorted(set(data) - set(CONFIG_KEYS))
        if unknown:
            raise ParseError(f"unknown key(s) {unknown}", key=unknown[0])
        for key in ("n", "k", "request_degree", "service"):
            if key not in data:
                raise ValidationError("required key is missing", key=key)

        def parsed(key, fn, default=None):
            if key not in data or data[key] is None:
                return default
            try:
                return fn(data[key])
            except ParseError as exc:
                raise ParseError(str(exc), key=key) from None
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), key=key) from None

        kwargs = dict(
            n=parsed("n", _as_int),
            k=parsed("k", _as_int),
            request_degree=parsed("request_degree", make_degree_policy),
            service=parsed("service", parse_distribution),
            buffer_mode=parsed("buffer_mode", str, "central"),
            removal=parsed("removal", parse_distribution, Constant(0.0)),
            arrivals=parsed("arrivals", lambda v: parse_arrivals(v, base_dir), NoArrivals()),
            regime=parsed("regime", parse_regime, None),
            m=parsed("m", _as_int, None),
            seed=parsed("seed", _as_int, 0),
            replications=parsed("replications", _as_int, 5),
            horizon=parsed("horizon", Horizon.from_json, Horizon()),
            dispatch=parsed("dispatch", str, "least-loaded"),
        )
        return cls(**kwargs)


def _as_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def load_config(path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return SystemConfig.from_dict(data, base_dir=path.parent)
