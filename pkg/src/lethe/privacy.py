"""Deletion-privacy analytics: likelihood ratio, availability, figure curves.

The adversary watching a hidden post weighs two hypotheses: the owner deleted
it, or the platform merely has it in a down phase.  The likelihood ratio of
those hypotheses depends only on the last observed up duration and the
elapsed down time,

    LR = (CCDF_up(dt_u) / pmf_up(dt_u) + 1) / CCDF_down(dt_d - 1),

so it is driven by the up distribution's inverse hazard rate and the down
distribution's CCDF.  Lower is better for the deleter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .distributions import DurationDistribution


@dataclass(frozen=True)
class ObservationSummary:
    """What the adversary can extract from watching one hidden post.

    ``last_up`` is the duration of the last observed up phase, ``down_elapsed``
    how long the post has currently been hidden, both in whole seconds;
    ``as_of`` is the observation time (last down-toggle + down_elapsed).
    """

    last_up: int
    down_elapsed: int
    as_of: int

    def __post_init__(self):
        if self.last_up < 1:
            raise ValueError(f"last_up must be >= 1, got {self.last_up}")
        if self.down_elapsed < 1:
            raise ValueError(f"down_elapsed must be >= 1, got {self.down_elapsed}")


@dataclass(frozen=True)
class LikelihoodRatio:
    """Outcome of the deletion-vs-withdrawal likelihood ratio test.

    ``value`` is linear scale and may be ``math.inf`` (finite-support down
    distribution exhausted).  ``certain`` marks the distinct case where the
    observed up duration is impossible without a deletion cutting it short,
    so the adversary knows regardless of the down time.
    """

    value: float
    certain: bool = False

    @property
    def log10(self) -> float:
        return math.log10(self.value) if self.value > 0 else -math.inf


def likelihood_ratio(
    up: DurationDistribution,
    down: DurationDistribution,
    obs: ObservationSummary,
) -> LikelihoodRatio:
    """Likelihood ratio of "deleted by now" vs "just withdrawn" at obs.as_of."""
    up_pmf = up.pmf(obs.last_up)
    if up_pmf == 0.0:
        # An up phase of this length has probability zero unless a deletion
        # truncated it: the adversary is certain.
        return LikelihoodRatio(value=math.inf, certain=True)
    numerator = up.inverse_hazard(obs.last_up) + 1.0
    denominator = down.ccdf(obs.down_elapsed - 1)
    if denominator == 0.0:
        return LikelihoodRatio(value=math.inf)
    return LikelihoodRatio(value=numerator / denominator)


def availability(mean_up: float, mean_down: float) -> float:
    """Long-run fraction of time a non-deleted post is visible."""
    if mean_up <= 0 or mean_down <= 0:
        raise ValueError("means must be positive")
    return mean_up / (mean_up + mean_down)


def _grid(t_max: int, step: int) -> range:
    if step < 1:
        raise ValueError(f"step must be >= 1 second, got {step}")
    return range(step, int(t_max) + 1, int(step))


def inverse_hazard_curve(
    d: DurationDistribution, t_max: int, step: int
) -> list[tuple[int, float]]:
    """Series of (t, ccdf(t)/pmf(t)); points outside the support become inf."""
    points = []
    for t in _grid(t_max, step):
        try:
            value = d.inverse_hazard(t)
        except ZeroDivisionError:
            value = math.inf
        points.append((t, value))
    return points


def inverse_ccdf_curve(
    d: DurationDistribution, t_max: int, step: int
) -> list[tuple[int, float]]:
    """Series of (t, 1/ccdf(t-1)); the down-distribution term of the LR."""
    points = []
    for t in _grid(t_max, step):
        ccdf = d.ccdf(t - 1)
        points.append((t, 1.0 / ccdf if ccdf > 0.0 else math.inf))
    return points


def lr_curve(
    up: DurationDistribution,
    downs: Sequence[DurationDistribution],
    t_max: int,
    step: int,
) -> list[tuple[DurationDistribution, list[tuple[int, float]]]]:
    """LR as a function of down-elapsed time, per candidate down distribution.

    The up distribution contributes a constant factor (it is geometric in
    every deployment this tool targets), so each series is
    (inverse_hazard_up + 1) / ccdf_down(t - 1).
    """
    constant = up.inverse_hazard(1) + 1.0
    series = []
    for down in downs:
        points = []
        for t in _grid(t_max, step):
            ccdf = down.ccdf(t - 1)
            points.append((t, constant / ccdf if ccdf > 0.0 else math.inf))
        series.append((down, points))
    return series


def curve_filename(figure: str, d: DurationDistribution) -> str:
    """File name '<figure>_<kind>[_n<value>].csv' for one distribution's series."""
    suffix = f"_n{d.shape:g}" if d.shape is not None else ""
    return f"{figure}_{d.kind}{suffix}.csv"


def write_curve_csv(
    path: str | Path, points: Iterable[tuple[int, float]], log10: bool = False
) -> None:
    """Write a (t_seconds, value) series; log10=True matches log-scaled figures."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_seconds", "value"])
        for t, value in points:
            if log10:
                value = math.log10(value) if 0.0 < value < math.inf else value
            writer.writerow([t, f"{value:.12g}"])
