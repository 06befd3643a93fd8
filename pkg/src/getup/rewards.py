"""Bounded shaping rewards for the get-up, imitation and balance tasks.

Every term is produced by the same primitive: a function that is 1.0 inside a
bound interval and decays along a Gaussian tail outside it, reaching a
configured value at a distance of one margin. Terms multiply into task
rewards, so each stays in [0, 1] and so does the composition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

# Margin-end values of exactly 0 make the Gaussian scale diverge, so the
# effective value is floored here. Keeps the intended "≈ 0 at the margin".
MIN_VALUE_AT_MARGIN = 1e-3


@dataclass(frozen=True)
class ToleranceSpec:
    """Parameters of one shaping term: bound interval, margin, margin value."""

    lower: float
    upper: float
    margin: float
    value_at_margin: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ConfigurationError(
                f"tolerance bounds inverted: [{self.lower}, {self.upper}]")
        if self.margin < 0:
            raise ConfigurationError(f"tolerance margin must be >= 0, got {self.margin}")
        if not 0.0 <= self.value_at_margin < 1.0:
            raise ConfigurationError(
                f"value_at_margin must be in [0, 1), got {self.value_at_margin}")

    def to_dict(self) -> dict:
        return {
            "bounds": [self.lower, self.upper],
            "margin": self.margin,
            "value_at_margin": self.value_at_margin,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToleranceSpec":
        lo, hi = d["bounds"]
        return cls(float(lo), float(hi), float(d["margin"]), float(d["value_at_margin"]))


def tolerance(value, spec: ToleranceSpec):
    """Shaping primitive: 1 inside the bounds, Gaussian tail outside.

    Outside the bounds the reward is exp(-0.5 * (d * s)^2) where d is the
    distance to the nearest bound in units of the margin and s is chosen so
    the curve passes through ``value_at_margin`` at d = 1. A zero margin
    degenerates to the indicator of the bound interval.

    Accepts scalars or arrays and is total (no exceptions for any finite
    input).
    """
    value = np.asarray(value, dtype=float)
    inside = (value >= spec.lower) & (value <= spec.upper)
    if spec.margin == 0.0:
        result = np.where(inside, 1.0, 0.0)
    else:
        distance = np.where(
            value < spec.lower, spec.lower - value,
            np.where(value > spec.upper, value - spec.upper, 0.0),
        ) / spec.margin
        v_eff = max(spec.value_at_margin, MIN_VALUE_AT_MARGIN)
        scale = math.sqrt(-2.0 * math.log(v_eff))
        result = np.where(inside, 1.0, np.exp(-0.5 * (distance * scale) ** 2))
    if result.ndim == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class RewardBreakdown:
    """Named per-term values plus the composed total, all in [0, 1]."""

    terms: dict
    total: float

    def as_dict(self) -> dict:
        out = dict(self.terms)
        out["total"] = self.total
        return out


def _pose_tracking(q, q_hat) -> float:
    q = np.asarray(q, dtype=float)
    q_hat = np.asarray(q_hat, dtype=float)
    if q.shape != q_hat.shape:
        raise ConfigurationError(
            f"pose dimensions differ: {q.shape} vs {q_hat.shape}")
    return float(np.exp(-0.25 * np.sum((q - q_hat) ** 2)))


@dataclass
class RewardParams:
    """Every tolerance spec used by the three task rewards, overridable from JSON.

    ``height_scale`` rescales the absolute-height bounds (head height, com
    height gates) for characters whose standing head height differs from the
    default model; 1.0 leaves the stock values untouched.
    """

    head_height: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(1.55, math.inf, 0.37, 0.1))
    torso_upright: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(0.9, math.inf, 1.9, 0.0))
    com_velocity: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(-0.3, 0.3, 1.2, 0.1))
    feet_distance: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(0.0, 0.9, 0.38, 0.0))
    com_height_gate: float = 0.5
    com_track: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(0.0, 0.0, 0.5, 0.1))
    orientation_track: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(-0.03, 0.03, 0.6, 0.3))
    hip_velocity_track: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(-0.5, 0.5, 1.3, 0.1))
    standing_com_velocity: ToleranceSpec = field(
        default_factory=lambda: ToleranceSpec(0.0, 0.0, 1.2, 0.1))
    height_scale: float = 1.0
    # Config-gated extras for reproducing the failed reward-engineering
    # ablations; both default off and both subtract nothing when disabled.
    energy_cost_weight: float = 0.0
    joint_velocity_penalty_weight: float = 0.0

    def scaled(self) -> "RewardParams":
        """Apply height_scale to the absolute-height parameters."""
        if self.height_scale == 1.0:
            return self
        s = self.height_scale
        out = RewardParams(**{**self.__dict__})
        out.head_height = ToleranceSpec(
            self.head_height.lower * s, self.head_height.upper * s,
            self.head_height.margin * s, self.head_height.value_at_margin)
        out.com_height_gate = self.com_height_gate * s
        out.height_scale = 1.0
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "head_height": self.head_height.to_dict(),
            "torso_upright": self.torso_upright.to_dict(),
            "com_velocity": self.com_velocity.to_dict(),
            "feet_distance": self.feet_distance.to_dict(),
            "com_height_gate": self.com_height_gate,
            "com_track": self.com_track.to_dict(),
            "orientation_track": self.orientation_track.to_dict(),
            "hip_velocity_track": self.hip_velocity_track.to_dict(),
            "standing_com_velocity": self.standing_com_velocity.to_dict(),
            "height_scale": self.height_scale,
            "energy_cost_weight": self.energy_cost_weight,
            "joint_velocity_penalty_weight": self.joint_velocity_penalty_weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardParams":
        params = cls()
        for name in ("head_height", "torso_upright", "com_velocity", "feet_distance",
                     "com_track", "orientation_track", "hip_velocity_track",
                     "standing_com_velocity"):
            if name in d:
                setattr(params, name, ToleranceSpec.from_dict(d[name]))
        for name in ("com_height_gate", "height_scale", "energy_cost_weight",
                     "joint_velocity_penalty_weight"):
            if name in d:
                setattr(params, name, float(d[name]))
        return params

    @classmethod
    def from_json(cls, path) -> "RewardParams":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"reward config {path}: {exc}") from exc
        return cls.from_dict(doc)


def reward_weak(head_height: float, com_height: float, torso_up_z: float,
                com_velocity_x: float, feet_distance: float,
                params: RewardParams | None = None) -> RewardBreakdown:
    """Get-up reward: head height x upright torso x slow com x feet together.

    The upright-torso term only applies above the com-height gate; below it a
    lying character is not penalised for being horizontal.
    """
    p = (params or RewardParams()).scaled()
    r_h = tolerance(head_height, p.head_height)
    if com_height > p.com_height_gate:
        r_straight = tolerance(torso_up_z, p.torso_upright)
    else:
        r_straight = 1.0
    # Planar model: the horizontal com velocity has a single component, so
    # the mean over horizontal components is that component's term.
    r_v_com = tolerance(com_velocity_x, p.com_velocity)
    r_feet = tolerance(feet_distance, p.feet_distance)
    terms = {"r_h": r_h, "r_straight": r_straight, "r_v_com": r_v_com, "r_feet": r_feet}
    total = r_h * r_straight * r_v_com * r_feet
    return RewardBreakdown(terms, float(total))


def reward_slow(delta_com_height: float, delta_torso_up, hip_velocity_deltas,
                params: RewardParams | None = None) -> RewardBreakdown:
    """Imitation reward: com-height tracking x orientation tracking x hip-velocity floor.

    The hip term enters through (r_hip + 2) / 3, so mistracking the hips can
    cost at most a third of the reward.
    """
    p = params or RewardParams()
    r_com = tolerance(delta_com_height, p.com_track)
    deltas = np.atleast_1d(np.asarray(delta_torso_up, dtype=float))
    r_ori = float(np.prod(tolerance(deltas, p.orientation_track)))
    hip = np.atleast_1d(np.asarray(hip_velocity_deltas, dtype=float))
    r_hip = float(np.mean(tolerance(hip, p.hip_velocity_track)))
    terms = {"r_com": r_com, "r_ori": r_ori, "r_hip": r_hip}
    total = r_com * r_ori * (r_hip + 2.0) / 3.0
    return RewardBreakdown(terms, float(total))


def reward_balance(com_velocity_x: float, torso_up_z: float, com_height: float,
                   delta_com_height: float, q, q_hat,
                   params: RewardParams | None = None) -> RewardBreakdown:
    """Standing reward: zero-bounded com velocity x upright x com tracking x pose tracking."""
    p = (params or RewardParams()).scaled()
    r_v_com = tolerance(com_velocity_x, p.standing_com_velocity)
    if com_height > p.com_height_gate:
        r_straight = tolerance(torso_up_z, p.torso_upright)
    else:
        r_straight = 1.0
    r_com = tolerance(delta_com_height, p.com_track)
    r_pose = _pose_tracking(q, q_hat)
    terms = {"r_v_com": r_v_com, "r_straight": r_straight, "r_com": r_com,
             "r_pose": r_pose}
    total = r_v_com * r_straight * r_com * r_pose
    return RewardBreakdown(terms, float(total))
