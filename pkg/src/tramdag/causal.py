"""Observational, interventional, and counterfactual queries.

All sampling draws per-node latent noise from substreams keyed by
(seed, node), so an intervention replays exactly the same exogenous
noise for every untouched node.  That makes L1/L2 comparisons on
non-descendants exact instead of Monte-Carlo, and it makes paired
treatment-effect arms nearly noise-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DiscreteCounterfactualError,
    EmptySampleError,
    LevelOutOfRangeError,
    MissingValueError,
    UnsupportedQueryError,
    ZeroCellError,
)
from .model import Dataset, TramDag
from .graph import strict_descendants, topological_order
from .streams import standard_logistic, substream
from .transform import sample_discrete

__all__ = [
    "SampleSet",
    "TreatmentEffect",
    "OddsRatioResult",
    "sample_observational",
    "sample_interventional",
    "treatment_effect",
    "abduct_noise",
    "counterfactual",
    "predicted_odds_ratio",
    "odds_ratio_from_counts",
    "odds_ratio_from_samples",
]

_SAMPLE_TAG = 0xD12A
_Z_95 = 1.959963984540054


@dataclass
class SampleSet:
    names: list[str]
    values: np.ndarray
    seed: int
    query: str = "observational"

    def __len__(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def to_dataset(self) -> Dataset:
        return Dataset(names=list(self.names), values=self.values.copy())

    def write_csv(self, path, discrete=None) -> None:
        self.to_dataset().write_csv(
            path,
            discrete=discrete,
            comments=[f"seed = {self.seed}", f"query = {self.query}"],
        )


def _resolve_do(model: TramDag, do: dict) -> dict[int, float]:
    out: dict[int, float] = {}
    for name, value in do.items():
        j = model.node_index(name)
        v = float(value)
        node = model.nodes[j]
        if node.is_discrete:
            if v != int(v) or not 1 <= v <= node.levels:
                raise LevelOutOfRangeError(
                    f"do({name}={value}): level must be an integer in 1..{node.levels}"
                )
        elif not math.isfinite(v):
            raise MissingValueError(f"do({name}) value must be finite")
        out[j] = v
    return out


def _simulate(model: TramDag, do_idx: dict[int, float], n: int, seed: int,
              arm: int | None = None) -> np.ndarray:
    if n < 1:
        raise EmptySampleError("need at least one sample row")
    matrix = np.zeros((n, len(model.nodes)))
    for j in topological_order(model.spec):
        if j in do_idx:
            matrix[:, j] = do_idx[j]
            continue
        node = model.nodes[j]
        tags = (_SAMPLE_TAG, j) if arm is None else (_SAMPLE_TAG, j, arm)
        u = standard_logistic(substream(seed, *tags), n)
        if node.is_discrete:
            cuts, shift = model.discrete_parts(j, matrix)
            matrix[:, j] = sample_discrete(cuts, shift, u)
        else:
            matrix[:, j] = model.invert_latent(j, u, matrix)
    return matrix


def sample_observational(model: TramDag, n: int, seed: int) -> SampleSet:
    values = _simulate(model, {}, n, seed)
    return SampleSet(names=list(model.spec.names), values=values, seed=seed)


def sample_interventional(model: TramDag, do: dict, n: int, seed: int,
                          arm: int | None = None) -> SampleSet:
    if not do:
        raise UnsupportedQueryError("interventional sampling needs a non-empty do()")
    do_idx = _resolve_do(model, do)
    values = _simulate(model, do_idx, n, seed, arm=arm)
    query = "do(" + ", ".join(f"{k}={do[k]}" for k in do) + ")"
    return SampleSet(names=list(model.spec.names), values=values, seed=seed, query=query)


@dataclass
class TreatmentEffect:
    mean_a: float
    mean_b: float
    difference: float
    std_error: float
    n: int


def treatment_effect(model: TramDag, do_a: dict, do_b: dict, target: str,
                     n: int, seed: int, independent_streams: bool = False) -> TreatmentEffect:
    """E[target | do_b] - E[target | do_a] with a Monte-Carlo standard error.

    By default both arms replay the same exogenous noise (paired design),
    so do_a == do_b gives exactly zero; pass independent_streams=True for
    two independent sample sets instead.
    """
    if target in do_a or target in do_b:
        raise UnsupportedQueryError(f"target {target} must not be intervened on")
    tj = model.node_index(target)
    arm_a = 1 if independent_streams else None
    arm_b = 2 if independent_streams else None
    xa = _simulate(model, _resolve_do(model, do_a), n, seed, arm=arm_a)[:, tj]
    xb = _simulate(model, _resolve_do(model, do_b), n, seed, arm=arm_b)[:, tj]
    if n > 1:
        if independent_streams:
            se = math.sqrt((np.var(xa, ddof=1) + np.var(xb, ddof=1)) / n)
        else:
            se = float(np.std(xb - xa, ddof=1)) / math.sqrt(n)
    else:
        se = float("nan")
    return TreatmentEffect(
        mean_a=float(np.mean(xa)),
        mean_b=float(np.mean(xb)),
        difference=float(np.mean(xb - xa)),
        std_error=se,
        n=n,
    )


def _check_observation(model: TramDag, observation) -> np.ndarray:
    row = np.asarray(observation, dtype=np.float64).ravel()
    if row.shape[0] != len(model.nodes):
        raise MissingValueError(
            f"observation has {row.shape[0]} values for {len(model.nodes)} nodes"
        )
    if not np.all(np.isfinite(row)):
        raise MissingValueError("observation contains non-finite values")
    for j, node in enumerate(model.nodes):
        if node.is_discrete and (row[j] != int(row[j]) or not 1 <= row[j] <= node.levels):
            raise LevelOutOfRangeError(f"{node.name}: observed level {row[j]} invalid")
    return row


def abduct_noise(model: TramDag, observation) -> np.ndarray:
    """Latent u_j = h(x_j | parents) per continuous node; NaN for discrete nodes.

    A discrete observation only pins its noise to an interval, which no
    downstream counterfactual is allowed to use.
    """
    row = _check_observation(model, observation)
    matrix = row.reshape(1, -1)
    u = np.full(len(model.nodes), np.nan)
    for j, node in enumerate(model.nodes):
        if not node.is_discrete:
            u[j] = model.latent_value(j, matrix)[0]
    return u


def counterfactual(model: TramDag, observation, do: dict) -> np.ndarray:
    """Abduction / action / prediction for one observed row."""
    if not do:
        raise UnsupportedQueryError("counterfactual needs a non-empty do()")
    do_idx = _resolve_do(model, do)
    row = _check_observation(model, observation)
    affected: set[int] = set()
    for j in do_idx:
        affected |= strict_descendants(model.spec, j)
    affected -= set(do_idx)
    for j in sorted(affected):
        if model.nodes[j].is_discrete:
            raise DiscreteCounterfactualError(
                f"{model.nodes[j].name} is a discrete descendant of the intervention; "
                "its noise value is only identified up to an interval"
            )
    u = abduct_noise(model, observation)
    matrix = row.copy().reshape(1, -1)
    for j in topological_order(model.spec):
        if j in do_idx:
            matrix[0, j] = do_idx[j]
        elif j in affected:
            matrix[0, j] = model.invert_latent(j, np.array([u[j]]), matrix)[0]
    return matrix[0]


def predicted_odds_ratio(beta: float) -> float:
    """exp(beta): the factor by which odds(child <= c) changes when the
    parent is raised by one unit under intervention."""
    return math.exp(beta)


@dataclass
class OddsRatioResult:
    odds_ratio: float
    ci_low: float
    ci_high: float
    cells: tuple[int, int, int, int]  # (int <=, int >, base <=, base >)


def odds_ratio_from_counts(a: int, b: int, c: int, d: int) -> OddsRatioResult:
    """2x2 odds ratio (a/b)/(c/d) with a 95% Wald interval on the log scale."""
    if min(a, b, c, d) <= 0:
        raise ZeroCellError(f"empty cell in 2x2 table ({a}, {b}, {c}, {d})")
    log_or = math.log(a) - math.log(b) - math.log(c) + math.log(d)
    se = math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)
    return OddsRatioResult(
        odds_ratio=math.exp(log_or),
        ci_low=math.exp(log_or - _Z_95 * se),
        ci_high=math.exp(log_or + _Z_95 * se),
        cells=(a, b, c, d),
    )


def odds_ratio_from_samples(samples_base: SampleSet, samples_int: SampleSet,
                            node: str, cutoff: float) -> OddsRatioResult:
    """Odds ratio of node <= cutoff, intervened sample set versus base."""
    if len(samples_base) == 0 or len(samples_int) == 0:
        raise EmptySampleError("both sample sets must be non-empty")
    x_int = samples_int.column(node)
    x_base = samples_base.column(node)
    a = int(np.sum(x_int <= cutoff))
    c = int(np.sum(x_base <= cutoff))
    return odds_ratio_from_counts(a, len(x_int) - a, c, len(x_base) - c)
