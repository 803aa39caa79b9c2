"""Seeded Monte Carlo harness: randomized settings, trial datasets, inference.

Each trial draws a setting pair from the configured distribution, asks the
configured source (quantum predictions, a local hidden-variable model, or a
detection-loophole faking model) for outcomes, and records the detection
flags. Estimation turns a dataset into the Bell statistic with a
delta-method confidence interval, and the decision rule rejects local
hidden variables when the one-sided lower confidence bound clears 0.

Every trial's randomness is keyed by (seed, trial index) through the
counter-based generator, so datasets are reproducible and independent of
how generation is partitioned across workers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Callable, Iterable, Sequence

from . import loophole as loophole_mod
from .counterfactuals import BELL_PAIRS
from .lhv import (
    DeterministicLhv,
    LocalModel,
    StochasticLocalModel,
    model_from_dict,
    model_to_dict,
    sample_from_lhv,
)
from .quantum import AngleTriple, match_table, sample_outcome_pair
from .rng import SplitMix64, derive_seed

SOURCE_QUANTUM = "quantum"
SOURCE_DETERMINISTIC_LHV = "deterministic-lhv"
SOURCE_STOCHASTIC_LHV = "stochastic-lhv"
SOURCE_LOOPHOLE = "loophole"
SOURCES = (
    SOURCE_QUANTUM,
    SOURCE_DETERMINISTIC_LHV,
    SOURCE_STOCHASTIC_LHV,
    SOURCE_LOOPHOLE,
)

UNIFORM_9 = "uniform-9"
UNIFORM_4 = "uniform-4"

CONDITION_COINCIDENCES = "coincidences-only"
CONDITION_ALL_PAIRS = "all-pairs"

CSV_HEADER = ("index", "x1", "x2", "y1", "y2", "d1", "d2")


class ConfigError(ValueError):
    """Experiment configuration does not match its source tag."""


class EstimationError(ValueError):
    """Dataset cannot support the requested estimate."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one simulated experiment."""

    n_trials: int
    seed: int
    source: str
    angles: AngleTriple | None = None
    model: LocalModel | None = None
    solution: loophole_mod.LpSolution | None = None
    setting_distribution: str = UNIFORM_9

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be at least 1, got {self.n_trials!r}")
        if self.setting_distribution not in (UNIFORM_9, UNIFORM_4):
            raise ConfigError(
                f"unknown setting distribution {self.setting_distribution!r}"
            )
        if self.source == SOURCE_QUANTUM:
            if self.angles is None:
                raise ConfigError("quantum source needs angles")
        elif self.source == SOURCE_DETERMINISTIC_LHV:
            if not isinstance(self.model, DeterministicLhv):
                raise ConfigError("deterministic-lhv source needs a DeterministicLhv model")
        elif self.source == SOURCE_STOCHASTIC_LHV:
            if not isinstance(self.model, StochasticLocalModel):
                raise ConfigError("stochastic-lhv source needs a StochasticLocalModel")
        elif self.source == SOURCE_LOOPHOLE:
            if self.solution is None or self.solution.status != "feasible":
                raise ConfigError("loophole source needs a feasible LpSolution")
        else:
            raise ConfigError(f"unknown source {self.source!r}")


@dataclass(frozen=True)
class TrialRecord:
    """One measurement event: settings, outcomes where detected, detection flags."""

    index: int
    x1: int
    x2: int
    y1: int | None
    y2: int | None
    d1: int
    d2: int

    def __post_init__(self) -> None:
        for flag, outcome, name in ((self.d1, self.y1, "1"), (self.d2, self.y2, "2")):
            if flag not in (0, 1):
                raise ValueError(f"d{name} must be 0 or 1, got {flag!r}")
            if (outcome is None) == bool(flag):
                raise ValueError(
                    f"y{name}={outcome!r} inconsistent with d{name}={flag!r}"
                )
            if outcome is not None and outcome not in (-1, 1):
                raise ValueError(f"y{name} must be -1 or +1, got {outcome!r}")


Sampler = Callable[[int, int, SplitMix64], tuple[int | None, int | None, int, int]]


def _make_sampler(config: ExperimentConfig) -> Sampler:
    if config.source == SOURCE_QUANTUM:
        table = match_table(config.angles)

        def sample(x1, x2, rng):
            y1, y2 = sample_outcome_pair((x1, x2), table, rng)
            return y1, y2, 1, 1

    elif config.source in (SOURCE_DETERMINISTIC_LHV, SOURCE_STOCHASTIC_LHV):
        model = config.model

        def sample(x1, x2, rng):
            y1, y2 = sample_from_lhv(model, (x1, x2), rng)
            return y1, y2, 1, 1

    else:
        solution = config.solution

        def sample(x1, x2, rng):
            return loophole_mod.sample_loophole_model(solution, (x1, x2), rng)

    return sample


def _draw_settings(distribution: str, rng: SplitMix64) -> tuple[int, int]:
    if distribution == UNIFORM_9:
        return rng.randbelow(3), rng.randbelow(3)
    return BELL_PAIRS[rng.randbelow(4)]


def _generate_range(
    config: ExperimentConfig, sampler: Sampler, start: int, stop: int
) -> list[TrialRecord]:
    records = []
    for i in range(start, stop):
        rng = SplitMix64(derive_seed(config.seed, i))
        x1, x2 = _draw_settings(config.setting_distribution, rng)
        y1, y2, d1, d2 = sampler(x1, x2, rng)
        records.append(TrialRecord(index=i, x1=x1, x2=x2, y1=y1, y2=y2, d1=d1, d2=d2))
    return records


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[TrialRecord]:
    """Generate the dataset for ``config``; identical config and seed give an
    identical record list, regardless of ``workers``.

    Trial randomness is keyed by (seed, trial index), so partitioning the
    index range across workers cannot change what any trial draws.
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers!r}")
    sampler = _make_sampler(config)
    if workers == 1 or config.n_trials < 2 * workers:
        return _generate_range(config, sampler, 0, config.n_trials)
    bounds = [round(k * config.n_trials / workers) for k in range(workers + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunks = pool.map(
            lambda span: _generate_range(config, sampler, *span),
            zip(bounds[:-1], bounds[1:]),
        )
        records: list[TrialRecord] = []
        for chunk in chunks:
            records.extend(chunk)
    return records


@dataclass(frozen=True)
class BellEstimate:
    """Estimated Bell statistic with per-cell counts and a normal interval.

    ``trials``/``coincidences``/``matches`` are 3x3 grids indexed by the
    setting pair; the statistic recomputes from them exactly. The drop count
    per cell (trials minus coincidences) makes the coincidence rate
    reportable alongside either conditioning.
    """

    trials: tuple[tuple[int, int, int], ...]
    coincidences: tuple[tuple[int, int, int], ...]
    matches: tuple[tuple[int, int, int], ...]
    statistic: float
    std_error: float
    ci_low: float
    ci_high: float
    confidence: float
    conditioning: str

    def cell_match_rate(self, i: int, j: int) -> float:
        denom = (
            self.coincidences[i][j]
            if self.conditioning == CONDITION_COINCIDENCES
            else self.trials[i][j]
        )
        return self.matches[i][j] / denom if denom else math.nan

    def to_dict(self) -> dict:
        return {
            "trials": [list(r) for r in self.trials],
            "coincidences": [list(r) for r in self.coincidences],
            "matches": [list(r) for r in self.matches],
            "statistic": self.statistic,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "conditioning": self.conditioning,
        }


@dataclass(frozen=True)
class Decision:
    """Outcome of the one-sided test of the Bell statistic against 0."""

    reject_lhv: bool
    margin: float
    alpha: float

    def to_dict(self) -> dict:
        return {"reject_lhv": self.reject_lhv, "margin": self.margin, "alpha": self.alpha}


def estimate(
    dataset: Iterable[TrialRecord],
    conditioning: str = CONDITION_COINCIDENCES,
    confidence: float = 0.99,
) -> BellEstimate:
    """Estimate the Bell statistic from a dataset.

    Per cell, the match rate is matches over coincidences
    ("coincidences-only") or matches over all trials of that cell
    ("all-pairs", scoring an undetected pair as a non-match). The standard
    error treats the four cells as independent binomials and the interval is
    the two-sided normal one at ``confidence``. Each of the four statistic
    cells must contain at least one coincident trial.
    """
    if conditioning not in (CONDITION_COINCIDENCES, CONDITION_ALL_PAIRS):
        raise ValueError(f"unknown conditioning {conditioning!r}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence {confidence!r} outside (0, 1)")

    trials = [[0] * 3 for _ in range(3)]
    coinc = [[0] * 3 for _ in range(3)]
    matches = [[0] * 3 for _ in range(3)]
    for rec in dataset:
        trials[rec.x1][rec.x2] += 1
        if rec.d1 and rec.d2:
            coinc[rec.x1][rec.x2] += 1
            if rec.y1 == rec.y2:
                matches[rec.x1][rec.x2] += 1

    rates = []
    variance = 0.0
    for i, j in BELL_PAIRS:
        if coinc[i][j] == 0:
            raise EstimationError(f"no coincident trials in cell ({i},{j})")
        denom = coinc[i][j] if conditioning == CONDITION_COINCIDENCES else trials[i][j]
        rate = matches[i][j] / denom
        rates.append(rate)
        variance += rate * (1.0 - rate) / denom

    statistic = rates[0] - rates[1] - rates[2] - rates[3]
    std_error = math.sqrt(variance)
    z = NormalDist().inv_cdf((1.0 + confidence) / 2.0)
    return BellEstimate(
        trials=tuple(tuple(r) for r in trials),
        coincidences=tuple(tuple(r) for r in coinc),
        matches=tuple(tuple(r) for r in matches),
        statistic=statistic,
        std_error=std_error,
        ci_low=statistic - z * std_error,
        ci_high=statistic + z * std_error,
        confidence=confidence,
        conditioning=conditioning,
    )


def decide(est: BellEstimate, alpha: float = 0.01) -> Decision:
    """Reject local hidden variables iff the one-sided lower confidence bound
    on the Bell statistic at level ``alpha`` exceeds 0."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha {alpha!r} outside (0, 1)")
    z = NormalDist().inv_cdf(1.0 - alpha)
    margin = est.statistic - z * est.std_error
    return Decision(reject_lhv=margin > 0.0, margin=margin, alpha=alpha)


def write_dataset_csv(records: Sequence[TrialRecord], target) -> None:
    """Write records as CSV; missing outcomes serialize as empty fields.

    ``target`` is a path or a text file object.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_dataset_csv(records, fh)
        return
    writer = csv.writer(target)
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(
            (
                r.index,
                r.x1,
                r.x2,
                "" if r.y1 is None else r.y1,
                "" if r.y2 is None else r.y2,
                r.d1,
                r.d2,
            )
        )


def read_dataset_csv(source) -> list[TrialRecord]:
    """Read a dataset written by :func:`write_dataset_csv`.

    Indices must be strictly increasing, as generation produces them.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_dataset_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise ValueError(f"unexpected dataset header {header!r}")
    records = []
    previous = None
    for row in reader:
        if not row:
            continue
        index, x1, x2, y1, y2, d1, d2 = row
        records.append(
            TrialRecord(
                index=int(index),
                x1=int(x1),
                x2=int(x2),
                y1=int(y1) if y1 != "" else None,
                y2=int(y2) if y2 != "" else None,
                d1=int(d1),
                d2=int(d2),
            )
        )
        if previous is not None and records[-1].index <= previous:
            raise ValueError(f"trial indices not strictly increasing at {index}")
        previous = records[-1].index
    return records


def config_to_dict(config: ExperimentConfig) -> dict:
    """JSON-ready metadata describing a run (the dataset sidecar)."""
    return {
        "n_trials": config.n_trials,
        "seed": config.seed,
        "source": config.source,
        "setting_distribution": config.setting_distribution,
        "angles_degrees": list(config.angles.degrees()) if config.angles else None,
        "model": model_to_dict(config.model) if config.model else None,
        "solution": config.solution.to_dict() if config.solution else None,
    }


def config_from_dict(doc: dict) -> ExperimentConfig:
    angles = doc.get("angles_degrees")
    model = doc.get("model")
    solution = doc.get("solution")
    return ExperimentConfig(
        n_trials=doc["n_trials"],
        seed=doc["seed"],
        source=doc["source"],
        angles=AngleTriple.from_degrees(*angles) if angles else None,
        model=model_from_dict(model) if model else None,
        solution=loophole_mod.LpSolution.from_dict(solution) if solution else None,
        setting_distribution=doc.get("setting_distribution", UNIFORM_9),
    )


def write_metadata(config: ExperimentConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")
