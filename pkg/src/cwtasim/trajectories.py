"""Discrete-time ordinal health-state trial simulation.

Health states form a five-level ladder (lower is better):

    0  complete response (CR)
    1  partial response (PR)
    2  stable disease (SD) -- every subject's baseline
    3  progressive disease (PD), irreversible
    4  death, absorbing; reachable only from PD

Each month a subject moves at most one level. A single uniform draw is
partitioned as [improve | stay | worsen]: the subject improves with
probability improve_prob[state] * improve_decay**(month - 1) and worsens
with probability worsen_prob[state]. Worsening chances are constant over
time; improvement chances decay geometrically, standing in for the
clinical pattern that responses concentrate early in treatment.
Experimental-arm subjects use worsening probabilities rescaled by a
hazard ratio (see apply_hazard_ratio).

Randomness contract: subject i of a trial draws from its own generator
seeded with mix64(trial_seed, i) and consumes exactly horizon + 2
uniforms in a fixed layout -- dropout flag, dropout month, then one per
month -- whether or not the subject drops out or dies early. Trials are
therefore bit-reproducible, and identical whether subjects are simulated
one at a time or as a vectorized batch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from math import expm1, log1p
from typing import Iterable, Sequence

import numpy as np

from .seeds import mix64, mix64_array

CR, PR, SD, PD, DEATH = 0, 1, 2, 3, 4
N_STATES = 5
MAX_STATE = 4  # ordinal span; one level change = weight 1/MAX_STATE

_STATE_KEYS = tuple(str(s) for s in range(N_STATES))


class Arm(IntEnum):
    CONTROL = 0
    EXPERIMENTAL = 1

    @property
    def label(self) -> str:
        return self.name.lower()


def _as_prob_tuple(values: Sequence[float], name: str) -> tuple[float, ...]:
    probs = tuple(float(v) for v in values)
    if len(probs) != N_STATES:
        raise ValueError(f"{name} must list one probability per state (got {len(probs)})")
    for s, p in enumerate(probs):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name}[{s}] = {p} is not a probability")
    return probs


@dataclass(frozen=True)
class TransitionModel:
    """Per-state monthly transition probabilities for the control arm.

    improve_prob[s] is the chance of moving one level down (better) before
    decay; worsen_prob[s] of moving one level up (worse); the remainder is
    the stay probability. Structural zeros are enforced: CR cannot improve,
    PD cannot improve (progression is irreversible), death is absorbing,
    and death is reachable only through PD.
    """

    improve_prob: tuple[float, ...]
    worsen_prob: tuple[float, ...]
    improve_decay: float = 1.0
    horizon_months: int = 60
    dropout_rate: float = 0.10

    def __post_init__(self) -> None:
        object.__setattr__(self, "improve_prob", _as_prob_tuple(self.improve_prob, "improve_prob"))
        object.__setattr__(self, "worsen_prob", _as_prob_tuple(self.worsen_prob, "worsen_prob"))
        for s in (CR, PD, DEATH):
            if self.improve_prob[s] != 0.0:
                raise ValueError(f"improve_prob[{s}] must be 0 (structural)")
        if self.worsen_prob[DEATH] != 0.0:
            raise ValueError("worsen_prob[4] must be 0 (death is absorbing)")
        for s in range(N_STATES):
            if self.improve_prob[s] + self.worsen_prob[s] > 1.0:
                raise ValueError(f"improve_prob[{s}] + worsen_prob[{s}] exceeds 1")
        if not 0.0 < self.improve_decay <= 1.0:
            raise ValueError(f"improve_decay must lie in (0, 1], got {self.improve_decay}")
        if int(self.horizon_months) < 1:
            raise ValueError("horizon_months must be a positive integer")
        object.__setattr__(self, "horizon_months", int(self.horizon_months))
        if not 0.0 <= self.dropout_rate <= 1.0:
            raise ValueError(f"dropout_rate = {self.dropout_rate} is not a probability")

    def to_json_dict(self) -> dict:
        return {
            "improve_prob": {k: self.improve_prob[int(k)] for k in _STATE_KEYS},
            "worsen_prob": {k: self.worsen_prob[int(k)] for k in _STATE_KEYS},
            "improve_decay": self.improve_decay,
            "horizon_months": self.horizon_months,
            "dropout_rate": self.dropout_rate,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TransitionModel":
        if not isinstance(data, dict):
            raise ValueError("transition model document must be a JSON object")
        known = {"improve_prob", "worsen_prob", "improve_decay", "horizon_months", "dropout_rate"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown transition model field(s): {', '.join(sorted(unknown))}")
        missing = {"improve_prob", "worsen_prob"} - set(data)
        if missing:
            raise ValueError(f"transition model document lacks {', '.join(sorted(missing))}")

        def probs(field: str) -> tuple[float, ...]:
            mapping = data[field]
            if not isinstance(mapping, dict) or not set(mapping) <= set(_STATE_KEYS):
                raise ValueError(f"{field} must map states '0'..'4' to probabilities")
            return tuple(float(mapping.get(k, 0.0)) for k in _STATE_KEYS)

        return cls(
            improve_prob=probs("improve_prob"),
            worsen_prob=probs("worsen_prob"),
            improve_decay=float(data.get("improve_decay", 1.0)),
            horizon_months=int(data.get("horizon_months", 60)),
            dropout_rate=float(data.get("dropout_rate", 0.10)),
        )


def _scale_probability(b: float, hr: float) -> float:
    if b <= 0.0:
        return 0.0
    if b >= 1.0:
        return 1.0
    # exact discrete-time analogue of scaling a hazard: 1 - (1 - b)**hr
    return -expm1(hr * log1p(-b))


def apply_hazard_ratio(
    model: TransitionModel, hr: float, improvement_hr: float | None = None
) -> TransitionModel:
    """Rescale worsening probabilities by a hazard ratio.

    A per-month probability b maps to b' = 1 - (1 - b)**hr, so the log
    survival-fraction ratio log(1 - b') / log(1 - b) equals hr to machine
    precision -- the exact discrete-time counterpart of multiplying a
    continuous hazard by hr. Improvement probabilities are left untouched
    (treatment effects act on worsening only) unless improvement_hr is
    given, in which case the same transform is applied to them.
    """
    if not hr > 0.0:
        raise ValueError(f"hazard ratio must be positive, got {hr}")
    worsen = tuple(_scale_probability(b, hr) for b in model.worsen_prob)
    improve = model.improve_prob
    if improvement_hr is not None:
        if not improvement_hr > 0.0:
            raise ValueError(f"improvement hazard ratio must be positive, got {improvement_hr}")
        improve = tuple(_scale_probability(a, improvement_hr) for a in model.improve_prob)
    return replace(model, worsen_prob=worsen, improve_prob=improve)


@dataclass(eq=False)
class SubjectTrajectory:
    """Observed monthly states of one subject.

    states[0] is the SD baseline; the array ends at the last observed
    month, i.e. it is truncated at the dropout month when the subject
    drops out and at the horizon otherwise.
    """

    states: np.ndarray
    dropout_month: int | None
    arm: Arm

    @property
    def censor_month(self) -> int:
        return len(self.states) - 1


@dataclass(frozen=True)
class TrialConfig:
    sample_size: int
    hazard_ratio: float
    control_model: TransitionModel
    seed: int
    improvement_hr: float | None = None

    def __post_init__(self) -> None:
        if self.sample_size < 2 or self.sample_size % 2 != 0:
            raise ValueError(
                f"sample_size must be an even integer >= 2 for 1:1 allocation, got {self.sample_size}"
            )
        if not self.hazard_ratio > 0.0:
            raise ValueError(f"hazard_ratio must be positive, got {self.hazard_ratio}")


@dataclass(eq=False)
class SimulatedTrial:
    subjects: list[SubjectTrajectory]
    config: TrialConfig


def subject_rng(trial_seed: int, subject_index: int) -> np.random.Generator:
    """The generator that subject_index draws from within a trial."""
    return np.random.default_rng(mix64(trial_seed, subject_index))


def subject_uniforms(base_seed: int, n: int, horizon: int) -> np.ndarray:
    """(n, horizon + 2) uniform draws, row i from the stream mix64(base_seed, i).

    Column layout per subject: dropout flag, dropout month, then one draw
    per month 1..horizon. Blocks are always drawn in full so the layout
    stays fixed regardless of what happens to the subject.
    """
    seeds = mix64_array((base_seed,), np.arange(n, dtype=np.uint64))
    out = np.empty((n, horizon + 2))
    width = horizon + 2
    for i in range(n):
        out[i] = np.random.default_rng(int(seeds[i])).random(width)
    return out


def _simulate_state_matrix(model: TransitionModel, monthly_u: np.ndarray) -> np.ndarray:
    """Evolve the state ladder for a batch of subjects.

    monthly_u holds one uniform per subject per month. The draw decides
    [improve | stay | worsen] in that order: improve iff u < p_improve,
    worsen iff u >= 1 - p_worsen. Model validation guarantees the two
    intervals never overlap.
    """
    n, horizon = monthly_u.shape
    improve = np.asarray(model.improve_prob)
    worsen = np.asarray(model.worsen_prob)
    states = np.empty((n, horizon + 1), dtype=np.int8)
    states[:, 0] = SD
    s = np.full(n, SD, dtype=np.intp)
    for m in range(1, horizon + 1):
        u = monthly_u[:, m - 1]
        p_improve = improve[s] * (model.improve_decay ** (m - 1))
        p_worsen = worsen[s]
        s = s - (u < p_improve) + (u >= 1.0 - p_worsen)
        states[:, m] = s
    return states


def _dropout_from_uniforms(model: TransitionModel, u_flag, u_month):
    dropped = u_flag < model.dropout_rate
    month = 1 + np.floor(np.asarray(u_month) * model.horizon_months).astype(np.int64)
    return dropped, month


def _trajectory_from_block(model: TransitionModel, block: np.ndarray, arm: Arm) -> SubjectTrajectory:
    states = _simulate_state_matrix(model, block[None, 2:])[0]
    dropped = bool(block[0] < model.dropout_rate)
    if dropped:
        d = 1 + int(block[1] * model.horizon_months)
        return SubjectTrajectory(states=states[: d + 1].copy(), dropout_month=d, arm=arm)
    return SubjectTrajectory(states=states, dropout_month=None, arm=arm)


def simulate_subject(
    control_model: TransitionModel,
    arm: Arm,
    hr: float,
    rng: np.random.Generator,
    improvement_hr: float | None = None,
) -> SubjectTrajectory:
    """Simulate one subject, consuming horizon + 2 uniforms from rng."""
    if arm == Arm.CONTROL:
        model = control_model
    else:
        model = apply_hazard_ratio(control_model, hr, improvement_hr)
    block = rng.random(control_model.horizon_months + 2)
    return _trajectory_from_block(model, block, arm)


def simulate_trial(config: TrialConfig) -> SimulatedTrial:
    """Simulate a 1:1 two-arm trial; subjects 0..n/2-1 are control.

    Bit-reproducible: per-subject streams are derived from
    (config.seed, subject_index), so the same config always yields the
    same trajectories.
    """
    model_c = config.control_model
    model_e = apply_hazard_ratio(model_c, config.hazard_ratio, config.improvement_hr)
    n = config.sample_size
    half = n // 2
    horizon = model_c.horizon_months

    blocks = subject_uniforms(config.seed, n, horizon)
    states = np.empty((n, horizon + 1), dtype=np.int8)
    states[:half] = _simulate_state_matrix(model_c, blocks[:half, 2:])
    states[half:] = _simulate_state_matrix(model_e, blocks[half:, 2:])
    dropped, d_month = _dropout_from_uniforms(model_c, blocks[:, 0], blocks[:, 1])

    subjects: list[SubjectTrajectory] = []
    for i in range(n):
        arm = Arm.CONTROL if i < half else Arm.EXPERIMENTAL
        if dropped[i]:
            d = int(d_month[i])
            subjects.append(SubjectTrajectory(states=states[i, : d + 1].copy(), dropout_month=d, arm=arm))
        else:
            subjects.append(SubjectTrajectory(states=states[i].copy(), dropout_month=None, arm=arm))
    return SimulatedTrial(subjects=subjects, config=config)


def best_overall_response(trajectory: SubjectTrajectory) -> int:
    """Best (minimum) state observed before censoring."""
    return int(trajectory.states.min())


def trial_state_matrix(
    subjects: Iterable[SubjectTrajectory], horizon: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack trajectories into a padded matrix for vectorized analysis.

    Returns (states, censor, arms) where states is (n, horizon + 1) int8
    with -1 marking unobserved months, censor[i] is the last observed
    month, and arms[i] the arm index.
    """
    subjects = list(subjects)
    if not subjects:
        raise ValueError("no trajectories supplied")
    max_obs = max(len(s.states) for s in subjects) - 1
    if horizon is None:
        horizon = max_obs
    elif max_obs > horizon:
        raise ValueError(f"trajectory extends to month {max_obs}, beyond horizon {horizon}")
    n = len(subjects)
    states = np.full((n, horizon + 1), -1, dtype=np.int8)
    censor = np.empty(n, dtype=np.int64)
    arms = np.empty(n, dtype=np.int8)
    for i, subj in enumerate(subjects):
        k = len(subj.states)
        states[i, :k] = subj.states
        censor[i] = k - 1
        arms[i] = int(subj.arm)
    return states, censor, arms
