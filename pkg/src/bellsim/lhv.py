"""Local hidden-variable models as data generators, and their Bell bounds.

Two model families: deterministic (a weighted mixture of counterfactual
tables drawn at the source) and stochastic (each particle's spin is an
independent Bernoulli draw whose success probability depends only on its own
setting). The grid search here checks that stochastic locality buys nothing:
the Bell statistic is multilinear in the six probabilities, so its maximum
over the probability box sits at a vertex, where the model degenerates to a
deterministic table already bounded by the enumeration result.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Union

import numpy as np

from .counterfactuals import CounterfactualTable, Population
from .quantum import MatchProbabilityTable

SETTINGS = (0, 1, 2)


@dataclass(frozen=True)
class DeterministicLhv:
    """Hidden-variable model: the source emits a counterfactual table by weight."""

    mixture: Population

    def __post_init__(self) -> None:
        if not all(isinstance(u, CounterfactualTable) for u in self.mixture.units):
            raise ValueError("DeterministicLhv mixture must contain CounterfactualTables")

    @classmethod
    def single(cls, table: CounterfactualTable) -> "DeterministicLhv":
        return cls(Population(units=(table,)))


@dataclass(frozen=True)
class StochasticLocalModel:
    """Per-setting spin-up probabilities for each particle, independent draws."""

    p1: tuple[float, float, float]
    p2: tuple[float, float, float]

    def __post_init__(self) -> None:
        for name in ("p1", "p2"):
            probs = tuple(float(v) for v in getattr(self, name))
            if len(probs) != 3 or any(not 0.0 <= v <= 1.0 for v in probs):
                raise ValueError(f"{name} must be three probabilities in [0, 1]")
            object.__setattr__(self, name, probs)


LocalModel = Union[DeterministicLhv, StochasticLocalModel]


def lhv_match_table(model: DeterministicLhv) -> MatchProbabilityTable:
    """Expected match probabilities of the mixture, for all nine setting pairs."""
    rows = []
    for i in SETTINGS:
        row = []
        for j in SETTINGS:
            mass = sum(
                w
                for w, u in zip(model.mixture.weights, model.mixture.units)
                if u.y1[i] == u.y2[j]
            )
            # Weight sums are only within 1e-12 of 1; clamp the round-off.
            row.append(min(1.0, max(0.0, mass)))
        rows.append(tuple(row))
    return MatchProbabilityTable(tuple(rows))


def stochastic_expected_match(model: StochasticLocalModel, x1: int, x2: int) -> float:
    """Probability two independent Bernoulli spins agree at settings (x1, x2)."""
    a = model.p1[x1]
    b = model.p2[x2]
    return a * b + (1.0 - a) * (1.0 - b)


@dataclass(frozen=True)
class GridSearchResult:
    """Outcome of the exhaustive grid search over stochastic models."""

    value: float
    argmax: tuple[float, float, float, float, float, float]
    argmax_is_vertex: bool
    evaluations: int


def stochastic_bell_search(grid_steps: int) -> GridSearchResult:
    """Maximize the Bell statistic over stochastic models on a probability grid.

    The grid is {0, 1/(g-1), ..., 1} in each of the six probabilities
    (p1[0..2], p2[0..2]). Ties resolve to the lexicographically lowest grid
    point. Any grid containing the endpoints has maximum 0, attained at a
    box vertex: the statistic is multilinear, so no interior point beats the
    best vertex, and vertices are deterministic tables with maximum 0.
    """
    if grid_steps < 2:
        raise ValueError(f"grid_steps must be at least 2, got {grid_steps!r}")
    g = np.linspace(0.0, 1.0, grid_steps)

    # Agreement probability s(a, b) = ab + (1-a)(1-b) for each pair in the
    # statistic; only p1[0], p1[1], p2[0], p2[2] enter, the other two axes
    # are flat directions.
    a0 = g[:, None, None, None]
    a1 = g[None, :, None, None]
    b0 = g[None, None, :, None]
    b2 = g[None, None, None, :]

    def agree(a, b):
        return a * b + (1.0 - a) * (1.0 - b)

    stat4 = agree(a1, b2) - agree(a0, b2) - agree(a1, b0) - agree(a0, b0)
    n = grid_steps
    full = np.broadcast_to(
        stat4[:, :, None, :, None, :], (n, n, n, n, n, n)
    )
    flat_index = int(np.argmax(full))  # first maximum in C order = lowest lex point
    idx = np.unravel_index(flat_index, full.shape)
    argmax = tuple(float(g[k]) for k in idx)
    value = float(full[idx])
    is_vertex = all(v in (0.0, 1.0) for v in argmax)
    return GridSearchResult(
        value=value, argmax=argmax, argmax_is_vertex=is_vertex, evaluations=n**6
    )


def stochastic_bell_supremum(grid_steps: int) -> float:
    """Maximum Bell statistic over the stochastic-model grid; 0 for every grid
    that includes the box endpoints."""
    return stochastic_bell_search(grid_steps).value


@lru_cache(maxsize=128)
def _cumulative(weights: tuple[float, ...]) -> tuple[float, ...]:
    acc = 0.0
    out = []
    for w in weights:
        acc += w
        out.append(acc)
    out[-1] = max(out[-1], 1.0)  # guard the inversion against rounding shortfall
    return tuple(out)


def draw_mixture_index(weights: tuple[float, ...], u: float) -> int:
    """Cumulative-weight inversion: index of the component containing ``u``."""
    return bisect_right(_cumulative(weights), u)


def sample_from_lhv(model: LocalModel, pair: tuple[int, int], rng) -> tuple[int, int]:
    """Draw one outcome pair (y1, y2) from a local model at the given settings.

    Deterministic mixtures draw a table by cumulative-weight inversion on a
    single uniform, then read the spins off; stochastic models draw the two
    spins as independent Bernoullis. ``rng`` needs a ``random()`` method.
    """
    x1, x2 = pair
    if isinstance(model, DeterministicLhv):
        k = draw_mixture_index(model.mixture.weights, rng.random())
        unit = model.mixture.units[k]
        return unit.y1[x1], unit.y2[x2]
    if isinstance(model, StochasticLocalModel):
        y1 = 1 if rng.random() < model.p1[x1] else -1
        y2 = 1 if rng.random() < model.p2[x2] else -1
        return y1, y2
    raise TypeError(f"not a local model: {model!r}")


def model_to_dict(model: LocalModel) -> dict:
    """JSON-ready representation; spins encode as +1/-1 integers."""
    if isinstance(model, DeterministicLhv):
        return {
            "tables": [
                {"y1": list(u.y1), "y2": list(u.y2)} for u in model.mixture.units
            ],
            "weights": list(model.mixture.weights),
        }
    if isinstance(model, StochasticLocalModel):
        return {"p1": list(model.p1), "p2": list(model.p2)}
    raise TypeError(f"not a local model: {model!r}")


def model_from_dict(doc: dict) -> LocalModel:
    """Parse a model document holding either tables+weights or p1+p2."""
    if "tables" in doc:
        units = tuple(
            CounterfactualTable(tuple(t["y1"]), tuple(t["y2"])) for t in doc["tables"]
        )
        weights = tuple(doc.get("weights") or ())
        return DeterministicLhv(Population(units=units, weights=weights))
    if "p1" in doc and "p2" in doc:
        return StochasticLocalModel(tuple(doc["p1"]), tuple(doc["p2"]))
    raise ValueError("model document needs either 'tables' or 'p1'/'p2' entries")


def load_model(path: str | Path) -> LocalModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def save_model(model: LocalModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
