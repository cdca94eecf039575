"""Stratified populations, survey samples, and survey weights.

A population is split into mutually exclusive strata, each with its own
generating density.  Sampling draws a fixed number of subjects per stratum
without replacement and attaches the weight ``population_size / sample_size``
of the subject's stratum, i.e. the number of population members each sampled
record represents.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .samplers import RngStream

CONTINUOUS = "continuous"
COUNT = "count"

_WEIGHT_TOL = 1e-12

# Fixed internal stream ids so that population generation and sampling are
# independent given one user-facing seed.
_POPULATION_STREAM = 1
_SAMPLING_STREAM = 2


@dataclass(frozen=True)
class NormalMixture:
    """Mixture of normal components given as (weight, mean, sd) triples."""

    components: tuple

    space = CONTINUOUS

    def __post_init__(self):
        comps = tuple((float(w), float(m), float(s)) for w, m, s in self.components)
        object.__setattr__(self, "components", comps)
        _check_mixture_weights([c[0] for c in comps])
        for _, _, sd in comps:
            if not sd > 0:
                raise ValueError(f"component sd must be positive, got {sd}")

    def mean(self):
        return sum(w * m for w, m, _ in self.components)

    def variance(self):
        mu = self.mean()
        return sum(w * (s * s + (m - mu) ** 2) for w, m, s in self.components)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, m, s in self.components:
            z = (x - m) / s
            out += w * np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
        return out

    def draw(self, gen, size):
        weights = np.array([c[0] for c in self.components])
        means = np.array([c[1] for c in self.components])
        sds = np.array([c[2] for c in self.components])
        which = gen.choice(len(weights), size=size, p=weights)
        return gen.normal(means[which], sds[which])


@dataclass(frozen=True)
class PoissonMixture:
    """Mixture of Poisson components given as (weight, rate) pairs."""

    components: tuple

    space = COUNT

    def __post_init__(self):
        comps = tuple((float(w), float(r)) for w, r in self.components)
        object.__setattr__(self, "components", comps)
        _check_mixture_weights([c[0] for c in comps])
        for _, rate in comps:
            if not rate > 0:
                raise ValueError(f"component rate must be positive, got {rate}")

    def mean(self):
        return sum(w * r for w, r in self.components)

    def variance(self):
        mu = self.mean()
        return sum(w * (r + (r - mu) ** 2) for w, r in self.components)

    def pmf(self, k):
        k = np.asarray(k)
        out = np.zeros(k.shape, dtype=float)
        kf = k.astype(float)
        for w, rate in self.components:
            out += w * np.exp(kf * math.log(rate) - rate - gammaln(kf + 1.0))
        return out

    def draw(self, gen, size):
        weights = np.array([c[0] for c in self.components])
        rates = np.array([c[1] for c in self.components])
        which = gen.choice(len(weights), size=size, p=weights)
        return gen.poisson(rates[which])


def _check_mixture_weights(weights):
    if not weights:
        raise ValueError("mixture needs at least one component")
    if any(w < 0 for w in weights):
        raise ValueError("component weights must be nonnegative")
    if abs(sum(weights) - 1.0) > _WEIGHT_TOL:
        raise ValueError(f"component weights must sum to 1, got {sum(weights)!r}")


@dataclass(frozen=True)
class StratumSpec:
    """One stratum: how many subjects exist, how many get sampled, and from what."""

    id: int
    population_size: int
    sample_size: int
    density: object

    def __post_init__(self):
        if self.population_size <= 0:
            raise ValueError(f"stratum {self.id}: population_size must be positive")
        if self.sample_size <= 0:
            raise ValueError(f"stratum {self.id}: sample_size must be positive")
        if self.sample_size > self.population_size:
            raise ValueError(
                f"stratum {self.id}: sample_size {self.sample_size} exceeds "
                f"population_size {self.population_size}"
            )

    @property
    def weight(self):
        """Survey weight attached to every sampled subject of this stratum."""
        return self.population_size / self.sample_size


@dataclass(frozen=True)
class PopulationSpec:
    """A stratified population design."""

    strata: tuple
    total_size: int

    def __post_init__(self):
        strata = tuple(self.strata)
        object.__setattr__(self, "strata", strata)
        if not strata:
            raise ValueError("population needs at least one stratum")
        ids = [s.id for s in strata]
        if len(set(ids)) != len(ids):
            raise ValueError(f"stratum ids must be distinct, got {ids}")
        total = sum(s.population_size for s in strata)
        if total != self.total_size:
            raise ValueError(
                f"total_size {self.total_size} != sum of stratum sizes {total}"
            )
        spaces = {s.density.space for s in strata}
        if len(spaces) != 1:
            raise ValueError("mixed observation spaces are not supported")

    @classmethod
    def from_strata(cls, strata):
        strata = tuple(strata)
        return cls(strata, sum(s.population_size for s in strata))

    @property
    def space(self):
        return self.strata[0].density.space

    def shares(self):
        """Population share of each stratum, in listed order."""
        return np.array([s.population_size / self.total_size for s in self.strata])

    def to_dict(self):
        return {
            "total_size": self.total_size,
            "strata": [
                {
                    "id": s.id,
                    "population_size": s.population_size,
                    "sample_size": s.sample_size,
                    "density": _density_to_dict(s.density),
                }
                for s in self.strata
            ],
        }

    @classmethod
    def from_dict(cls, data):
        strata = tuple(
            StratumSpec(
                id=int(s["id"]),
                population_size=int(s["population_size"]),
                sample_size=int(s["sample_size"]),
                density=_density_from_dict(s["density"]),
            )
            for s in data["strata"]
        )
        return cls(strata, int(data["total_size"]))


def _density_to_dict(density):
    if isinstance(density, NormalMixture):
        return {"type": "normal_mixture", "components": [list(c) for c in density.components]}
    if isinstance(density, PoissonMixture):
        return {"type": "poisson_mixture", "components": [list(c) for c in density.components]}
    raise TypeError(f"unknown density spec {type(density)!r}")


def _density_from_dict(data):
    kind = data["type"]
    comps = tuple(tuple(c) for c in data["components"])
    if kind == "normal_mixture":
        return NormalMixture(comps)
    if kind == "poisson_mixture":
        return PoissonMixture(comps)
    raise ValueError(f"unknown density type {kind!r}")


@dataclass
class Population:
    """Generated population values, one array per stratum (in spec order)."""

    spec: PopulationSpec
    values: dict

    def stratum_values(self, stratum_id):
        return self.values[stratum_id]


@dataclass(eq=False)
class SurveySample:
    """Sampled records with their survey weights.

    ``values[i]`` was observed on a subject of stratum ``strata[i]`` and
    represents ``weights[i]`` population members.
    """

    values: np.ndarray
    strata: np.ndarray
    weights: np.ndarray
    population_size: int
    space: str = CONTINUOUS

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.strata = np.asarray(self.strata, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=float)
        if not (len(self.values) == len(self.strata) == len(self.weights)):
            raise ValueError("values, strata and weights must have equal length")
        if len(self.values) == 0:
            raise ValueError("sample must contain at least one record")
        if np.any(self.weights <= 0):
            raise ValueError("all survey weights must be positive")
        if self.population_size <= 0:
            raise ValueError("population_size must be positive")
        if self.space not in (CONTINUOUS, COUNT):
            raise ValueError(f"unknown observation space {self.space!r}")
        if self.space == COUNT:
            vals = np.asarray(self.values)
            if np.any(vals < 0) or np.any(vals != np.floor(vals)):
                raise ValueError("count-space values must be nonnegative integers")
            self.values = vals.astype(np.int64)
        else:
            self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, SurveySample):
            return NotImplemented
        return (
            self.population_size == other.population_size
            and self.space == other.space
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.strata, other.strata)
            and np.array_equal(self.weights, other.weights)
        )


def generate_population(spec, seed):
    """Draw every stratum of ``spec`` i.i.d. from its density."""
    gen = RngStream(seed, _POPULATION_STREAM).gen
    values = {}
    for stratum in spec.strata:
        try:
            values[stratum.id] = stratum.density.draw(gen, stratum.population_size)
        except ValueError as exc:
            raise ValueError(f"stratum {stratum.id}: {exc}") from exc
    return Population(spec=spec, values=values)


def draw_stratified_sample(population, spec, seed):
    """Sample ``sample_size`` subjects per stratum, uniformly without replacement."""
    gen = RngStream(seed, _SAMPLING_STREAM).gen
    values = []
    strata = []
    weights = []
    for stratum in spec.strata:
        pool = population.stratum_values(stratum.id)
        if stratum.sample_size > len(pool):
            raise ValueError(
                f"stratum {stratum.id}: cannot sample {stratum.sample_size} "
                f"from {len(pool)} subjects"
            )
        idx = gen.choice(len(pool), size=stratum.sample_size, replace=False)
        values.append(pool[idx])
        strata.append(np.full(stratum.sample_size, stratum.id, dtype=np.int64))
        weights.append(np.full(stratum.sample_size, stratum.weight))
    return SurveySample(
        values=np.concatenate(values),
        strata=np.concatenate(strata),
        weights=np.concatenate(weights),
        population_size=spec.total_size,
        space=spec.space,
    )


def effective_c(sample):
    """The weight normalizing constant (sum of weights) / population size.

    Equals 1 exactly under a design with weights N_m/n_m and full per-stratum
    quotas.
    """
    return float(sample.weights.sum() / sample.population_size)


def normalize_weights(sample):
    """Weights rescaled to sum to one."""
    return sample.weights / sample.weights.sum()


def save_sample(path, sample, population_spec=None):
    """Write a sample as CSV plus a JSON sidecar carrying the metadata.

    The CSV has header ``y,stratum,weight`` with full-precision reals.  The
    sidecar (same name with a ``.meta.json`` suffix) stores the population
    size, the observation space, and the generating design when known.
    """
    import pathlib

    path = pathlib.Path(path)
    lines = ["y,stratum,weight"]
    count_space = sample.space == COUNT
    for y, m, w in zip(sample.values, sample.strata, sample.weights):
        y_txt = str(int(y)) if count_space else repr(float(y))
        lines.append(f"{y_txt},{int(m)},{repr(float(w))}")
    path.write_text("\n".join(lines) + "\n")

    meta = {
        "population_size": int(sample.population_size),
        "space": sample.space,
        "population_spec": population_spec.to_dict() if population_spec else None,
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def _sidecar(path):
    import pathlib

    path = pathlib.Path(path)
    return path.with_suffix(".meta.json")


def load_sample(path):
    """Read a sample written by :func:`save_sample`.

    Raises ValueError with the offending line number on malformed input.
    """
    import pathlib

    path = pathlib.Path(path)
    meta_path = _sidecar(path)
    if not meta_path.exists():
        raise ValueError(f"missing sidecar {meta_path}")
    meta = json.loads(meta_path.read_text())

    values, strata, weights = [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "y,stratum,weight":
            raise ValueError(f"{path}: line 1: expected header 'y,stratum,weight'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 fields")
            try:
                y = float(parts[0])
                m = int(parts[1])
                w = float(parts[2])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
            if w <= 0:
                raise ValueError(f"{path}: line {lineno}: weight must be positive")
            values.append(y)
            strata.append(m)
            weights.append(w)
    if not values:
        raise ValueError(f"{path}: no records")
    return SurveySample(
        values=np.array(values),
        strata=np.array(strata, dtype=np.int64),
        weights=np.array(weights),
        population_size=int(meta["population_size"]),
        space=meta.get("space", CONTINUOUS),
    )


def load_population_spec(path):
    """The PopulationSpec stored in a sample's sidecar, or None if absent."""
    meta_path = _sidecar(path)
    if not meta_path.exists():
        return None
    meta = json.loads(meta_path.read_text())
    spec = meta.get("population_spec")
    return PopulationSpec.from_dict(spec) if spec else None
