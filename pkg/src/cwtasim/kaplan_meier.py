"""Kaplan-Meier estimation and the two-sample logrank test on monthly data.

Endpoints are derived from trajectories: PFS is the first month at PD or
worse, OS the first month at death; otherwise the subject is censored at
its last observed month. Ties follow the standard convention that a
subject censored at t is still at risk for events at t.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import sqrt

import numpy as np
from scipy import stats

from .trajectories import DEATH, PD, Arm, SubjectTrajectory


class Endpoint(Enum):
    PFS = "PFS"
    OS = "OS"


@dataclass(frozen=True)
class TimeToEventRecord:
    time: int
    event: bool
    arm: Arm

    def __post_init__(self) -> None:
        if self.time < 1:
            raise ValueError(f"event/censor time must be >= 1, got {self.time}")


@dataclass(frozen=True)
class KMStep:
    time: int
    survival: float
    at_risk: int
    events: int


@dataclass(frozen=True)
class KMCurve:
    steps: tuple[KMStep, ...]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    z: float
    p_value: float
    observed_minus_expected: float
    variance: float


class DegenerateTestError(RuntimeError):
    """No events, or zero variance: the test statistic is undefined."""


def derive_endpoint(trajectory: SubjectTrajectory, kind: Endpoint) -> TimeToEventRecord:
    """Time-to-event record for one subject (event, else censored last month)."""
    threshold = PD if kind == Endpoint.PFS else DEATH
    hits = np.nonzero(trajectory.states >= threshold)[0]
    if hits.size:
        return TimeToEventRecord(time=int(hits[0]), event=True, arm=trajectory.arm)
    return TimeToEventRecord(time=trajectory.censor_month, event=False, arm=trajectory.arm)


def endpoint_arrays(states: np.ndarray, censor: np.ndarray, threshold: int):
    """Vectorized endpoint derivation from a padded state matrix.

    Equivalent to derive_endpoint applied row by row; padding of -1 never
    crosses a threshold so unobserved months cannot fire events.
    """
    reached = states >= threshold
    has_event = reached.any(axis=1)
    first = reached.argmax(axis=1)
    times = np.where(has_event, first, censor)
    return times.astype(np.int64), has_event


def km_estimate(records: list[TimeToEventRecord]) -> KMCurve:
    """Product-limit survival estimate.

    S(t) = prod_{t_j <= t} (1 - d_j / n_j) over distinct event times t_j,
    with n_j counting every record whose time is >= t_j (so subjects
    censored exactly at t_j remain at risk there).
    """
    if not records:
        raise ValueError("km_estimate requires at least one record")
    times = np.array([r.time for r in records], dtype=np.int64)
    events = np.array([r.event for r in records], dtype=bool)
    steps = []
    survival = 1.0
    for t in np.unique(times[events]):
        n = int((times >= t).sum())
        d = int(((times == t) & events).sum())
        survival *= 1.0 - d / n
        steps.append(KMStep(time=int(t), survival=survival, at_risk=n, events=d))
    return KMCurve(steps=tuple(steps))


def monthly_logrank_terms(
    times: np.ndarray, events: np.ndarray, arms: np.ndarray, horizon: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-month logrank contributions for the control arm.

    At each month m with d_m events out of n_m at risk (n1_m in control),
    the control arm's observed events d1_m are compared with the
    hypergeometric mean E1_m = d_m * n1_m / n_m and variance

        V_m = d_m * p_m * (1 - p_m) * (n_m - d_m) / (n_m - 1),

    p_m = n1_m / n_m, V_m = 0 when n_m <= 1. Returns arrays indexed by
    month 1..horizon of (d1_m - E1_m) and V_m; months without events
    contribute zero, so prefix sums give the statistic of the data
    truncated at any month.
    """
    width = horizon + 1
    is_control = arms == int(Arm.CONTROL)

    def at_risk(t: np.ndarray) -> np.ndarray:
        return np.cumsum(np.bincount(t, minlength=width)[::-1])[::-1]

    n = at_risk(times)
    n1 = at_risk(times[is_control])
    d = np.bincount(times[events], minlength=width)
    d1 = np.bincount(times[events & is_control], minlength=width)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, n1 / np.maximum(n, 1), 0.0)
        e1 = d * p
        v = np.where(n > 1, d * p * (1.0 - p) * (n - d) / np.maximum(n - 1, 1), 0.0)
    return (d1 - e1)[1:], v[1:]


def test_from_sums(observed_minus_expected: float, variance: float) -> TestResult:
    z = observed_minus_expected / sqrt(variance)
    p = 2.0 * float(stats.norm.sf(abs(z)))
    return TestResult(
        statistic=z * z,
        z=z,
        p_value=p,
        observed_minus_expected=observed_minus_expected,
        variance=variance,
    )


def logrank_test(records: list[TimeToEventRecord]) -> TestResult:
    """Two-sample logrank test; z = (O1 - E1) / sqrt(V) with arm 1 = control.

    z > 0 means the control arm accumulated more events than expected
    under the null. The statistic is z**2 with a two-sided normal p-value.
    Raises DegenerateTestError when there are no events or V = 0.
    """
    if not records:
        raise ValueError("logrank_test requires at least one record")
    arms = np.array([int(r.arm) for r in records], dtype=np.int8)
    if len(set(arms.tolist())) < 2:
        raise ValueError("logrank_test requires records from both arms")
    times = np.array([r.time for r in records], dtype=np.int64)
    events = np.array([r.event for r in records], dtype=bool)
    ome, v = monthly_logrank_terms(times, events, arms, int(times.max()))
    total_v = float(v.sum())
    if not events.any():
        raise DegenerateTestError("no events in either arm")
    if total_v <= 0.0:
        raise DegenerateTestError("zero variance: every event month has a one-sided risk set")
    return test_from_sums(float(ome.sum()), total_v)
