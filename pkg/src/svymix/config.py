"""Run configuration shared by the fitting drivers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Schedule:
    """MCMC schedule: discard ``burnin`` sweeps, then run ``iters`` more and
    keep every ``thin``-th state."""

    burnin: int = 5000
    iters: int = 10000
    thin: int = 10

    def __post_init__(self):
        if self.burnin < 0 or self.iters <= 0 or self.thin <= 0:
            raise ValueError("schedule values must be positive (burnin may be 0)")
        if self.iters % self.thin:
            raise ValueError("iters must be a multiple of thin")

    @property
    def kept(self):
        return self.iters // self.thin


@dataclass(frozen=True)
class FitConfig:
    """Priors, truncation, adjustment mass, and schedule for one fit.

    ``adjust_mass`` overrides the fraction-of-population default when set.
    ``tau2_scale_divisor`` controls the component-variance prior scale
    (sample variance divided by this; 2 by default, larger values give
    tighter kernels for heavily skewed counts).  ``represented_only``
    restricts reported population densities to components carrying sample
    records (the raw adjustment draw always keeps the full prior mass).
    """

    trunc: int = 20
    alpha_shape: float = 0.25
    alpha_rate: float = 0.25
    tau2_shape: float = 2.0
    tau2_scale_divisor: float = 2.0
    adjust_fraction: float = 0.02
    adjust_mass: float | None = None
    represented_only: bool = True
    cutpoints: str = "integer"
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        if self.trunc < 2:
            raise ValueError("trunc must be at least 2")
        for name in ("alpha_shape", "alpha_rate", "tau2_shape",
                     "tau2_scale_divisor", "adjust_fraction"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.adjust_mass is not None and not self.adjust_mass > 0:
            raise ValueError("adjust_mass must be positive")
        if self.cutpoints not in ("integer", "log"):
            raise ValueError(f"unknown cutpoints scheme {self.cutpoints!r}")

    def to_dict(self):
        data = asdict(self)
        sched = data.pop("schedule")
        data.update(sched)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        sched = Schedule(
            burnin=int(data.pop("burnin", 5000)),
            iters=int(data.pop("iters", 10000)),
            thin=int(data.pop("thin", 10)),
        )
        known = {f for f in cls.__dataclass_fields__ if f != "schedule"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(schedule=sched, **data)
