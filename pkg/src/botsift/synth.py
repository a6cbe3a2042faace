"""Seeded synthetic flow generator.

A traffic profile gives, per class, a mean and coefficient of variation
for each numeric feature plus token weights for proto/state. Features are
drawn independently from log-normal marginals matched to (mean, cv), with
one exception: when spkts and dpkts are both profiled, pkts is their sum
rather than an independent draw. Class counts are exact and deterministic
(round half up of row_count * class_ratio botnet rows), and every value
stream is derived from the seed, so equal (profile, rows, seed) inputs
reproduce files byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .errors import SynthError
from .flows import NAMED_FIELDS, FlowRecord

CLASS_KEYS = {"normal": 0, "botnet": 1}


@dataclass(frozen=True)
class FeatureSpec:
    mean: float
    cv: float = 1.0


@dataclass
class TrafficProfile:
    """features: name -> {class_label: FeatureSpec}.
    tokens: column -> {class_label: {token: weight}}.
    class_ratio is the botnet fraction of generated rows."""

    features: dict[str, dict[int, FeatureSpec]]
    tokens: dict[str, dict[int, dict[str, float]]] = field(default_factory=dict)
    class_ratio: float = 0.5
    row_count: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.features:
            raise SynthError("profile defines no features")
        if not 0.0 < self.class_ratio < 1.0:
            raise SynthError(f"class_ratio must be in (0, 1), got {self.class_ratio}")
        if self.row_count < 1:
            raise SynthError(f"row_count must be >= 1, got {self.row_count}")
        for name, per_class in self.features.items():
            if set(per_class) != {0, 1}:
                raise SynthError(f"feature {name!r} needs both class entries")
            for spec in per_class.values():
                if not (spec.mean > 0 and math.isfinite(spec.mean)):
                    raise SynthError(f"feature {name!r}: mean must be positive")
                if not (spec.cv > 0 and math.isfinite(spec.cv)):
                    raise SynthError(f"feature {name!r}: cv must be positive")
        for column, per_class in self.tokens.items():
            for weights in per_class.values():
                if not weights:
                    raise SynthError(f"token column {column!r} has no tokens")
                if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
                    raise SynthError(f"token column {column!r}: bad weights")
        if "pkts" in self.features and self._derives_pkts():
            for c in (0, 1):
                stated = self.features["pkts"][c].mean
                implied = (self.features["spkts"][c].mean
                           + self.features["dpkts"][c].mean)
                if abs(stated - implied) > 1e-6 * max(stated, implied):
                    raise SynthError(
                        f"profile pkts mean {stated} conflicts with "
                        f"spkts+dpkts = {implied} (pkts is derived)")

    def _derives_pkts(self) -> bool:
        return "spkts" in self.features and "dpkts" in self.features

    def sampled_features(self) -> list[str]:
        """Feature names drawn from their own marginal, sorted."""
        skip = {"pkts"} if self._derives_pkts() else set()
        return sorted(name for name in self.features if name not in skip)

    @classmethod
    def from_json(cls, path: str) -> "TrafficProfile":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise SynthError(f"profile not found: {path}")
        except json.JSONDecodeError as exc:
            raise SynthError(f"profile {path} is not valid JSON: {exc}")
        return cls._from_dict(raw, where=path)

    @classmethod
    def _from_dict(cls, raw: dict, where: str = "profile") -> "TrafficProfile":
        if not isinstance(raw, dict) or "features" not in raw:
            raise SynthError(f"{where}: profile must be an object with 'features'")
        features: dict[str, dict[int, FeatureSpec]] = {}
        for name, per_class in raw["features"].items():
            if not isinstance(per_class, dict):
                raise SynthError(f"{where}: feature {name!r} must map classes")
            parsed: dict[int, FeatureSpec] = {}
            for key, spec in per_class.items():
                if key not in CLASS_KEYS:
                    raise SynthError(f"{where}: unknown class key {key!r}")
                parsed[CLASS_KEYS[key]] = FeatureSpec(
                    mean=float(spec["mean"]), cv=float(spec.get("cv", 1.0)))
            features[name] = parsed
        tokens: dict[str, dict[int, dict[str, float]]] = {}
        for column, value in raw.get("tokens", {}).items():
            if set(value) <= set(CLASS_KEYS):
                tokens[column] = {
                    CLASS_KEYS[k]: {t: float(w) for t, w in v.items()}
                    for k, v in value.items()}
                for c in (0, 1):
                    if c not in tokens[column]:
                        raise SynthError(
                            f"{where}: token column {column!r} needs both classes")
            else:  # one flat weight table shared by both classes
                shared = {t: float(w) for t, w in value.items()}
                tokens[column] = {0: shared, 1: dict(shared)}
        return cls(
            features=features,
            tokens=tokens,
            class_ratio=float(raw.get("class_ratio", 0.5)),
            row_count=int(raw.get("row_count", 1000)),
            seed=int(raw.get("seed", 0)),
        )


def bundled_profile_path(name: str = "botiot-means") -> str:
    """Filesystem path of a profile shipped inside the package."""
    path = resources.files("botsift").joinpath(f"profiles/{name}.profile")
    if not path.is_file():
        available = sorted(
            p.name.removesuffix(".profile")
            for p in resources.files("botsift").joinpath("profiles").iterdir()
            if p.name.endswith(".profile"))
        raise SynthError(
            f"no bundled profile named {name!r}; available: {available}")
    with resources.as_file(path) as p:
        return str(p)


def default_profile() -> TrafficProfile:
    return TrafficProfile.from_json(bundled_profile_path())


def _lognormal_params(spec: FeatureSpec) -> tuple[float, float]:
    """(mu, sigma) of the log-normal with the spec's mean and cv."""
    sigma2 = math.log1p(spec.cv * spec.cv)
    mu = math.log(spec.mean) - 0.5 * sigma2
    return mu, math.sqrt(sigma2)


def class_counts_for(row_count: int, class_ratio: float) -> tuple[int, int]:
    """Exact (normal, botnet) counts: botnet = round half up of n*ratio.

    The ratio is taken at its decimal face value (via its shortest
    round-trip representation), so 0.99527 of 50,000 is exactly 49,763.5
    and rounds up; the nearest binary float would land a hair below the
    half and silently round down.
    """
    botnet = math.floor(Fraction(str(class_ratio)) * row_count + Fraction(1, 2))
    return row_count - botnet, botnet


def generate(profile: TrafficProfile, rows: int | None = None,
             seed: int | None = None) -> list[FlowRecord]:
    """Generate flow records from a profile.

    rows and seed default to the profile's own values. Row order is a
    seeded shuffle of the two class blocks.
    """
    n = profile.row_count if rows is None else rows
    if n < 1:
        raise SynthError(f"need at least one row, got {n}")
    rng_seed = profile.seed if seed is None else seed
    rng = np.random.default_rng(rng_seed)
    normal_count, botnet_count = class_counts_for(n, profile.class_ratio)

    labels = np.concatenate([
        np.zeros(normal_count, dtype=np.int64),
        np.ones(botnet_count, dtype=np.int64),
    ])
    labels = labels[rng.permutation(n)]

    counts = {0: normal_count, 1: botnet_count}
    values: dict[str, dict[int, np.ndarray]] = {}
    for name in profile.sampled_features():
        values[name] = {}
        for c in (0, 1):
            mu, sigma = _lognormal_params(profile.features[name][c])
            values[name][c] = rng.lognormal(mu, sigma, counts[c])
    if profile._derives_pkts():
        values["pkts"] = {c: values["spkts"][c] + values["dpkts"][c]
                          for c in (0, 1)}

    token_values: dict[str, dict[int, np.ndarray]] = {}
    for column in sorted(profile.tokens):
        token_values[column] = {}
        for c in (0, 1):
            weights = profile.tokens[column][c]
            names = sorted(weights)
            p = np.array([weights[t] for t in names], dtype=np.float64)
            token_values[column][c] = rng.choice(names, size=counts[c],
                                                 p=p / p.sum())

    records: list[FlowRecord] = []
    cursor = {0: 0, 1: 0}
    for label in labels:
        c = int(label)
        i = cursor[c]
        cursor[c] += 1
        rec = FlowRecord(attack=c)
        for name, per_class in values.items():
            if name in NAMED_FIELDS:
                setattr(rec, name, float(per_class[c][i]))
            else:
                rec.extra[name] = float(per_class[c][i])
        for column, per_class in token_values.items():
            token = str(per_class[c][i])
            if column in NAMED_FIELDS:
                setattr(rec, column, token)
            else:
                rec.extra[column] = token
        records.append(rec)
    return records
