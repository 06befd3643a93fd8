"""The get-up MDP: rag-doll fall initialization, weak-stage observations,
reward wiring and episode bookkeeping.

Episodes start from a randomized rag-doll drop. The controller then has a
fixed budget of control steps with no early termination; rewards are the
bounded get-up shaping terms, so returns live in [0, episode_steps].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .character import CharacterModel
from .dynamics import SimConfig, SimState, control_step, forward_kinematics
from .errors import ConfigurationError, ContractError, SimulationDivergedError
from .rewards import RewardBreakdown, RewardParams, reward_weak
from . import trajlog

ACTION_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class EnvConfig:
    """Episode and initialization parameters."""

    ragdoll_steps: int = 80
    drop_height: float = 1.5
    ragdoll_action_std: float = 0.1
    episode_steps: int = 250
    reset_retries: int = 10

    def __post_init__(self):
        for name in ("ragdoll_steps", "episode_steps", "reset_retries"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.drop_height <= 0 or self.ragdoll_action_std < 0:
            raise ConfigurationError("drop_height must be > 0 and noise std >= 0")


@dataclass(frozen=True)
class ObservationWeak:
    """Weak-stage observation: proprioception plus task height/orientation cues.

    The flat layout is [joint_angles, joint_velocities, head_height,
    com_velocity (x, z), end-effector offsets (egocentric, flattened),
    torso up projection, strength multiplier].
    """

    joint_angles: np.ndarray
    joint_velocities: np.ndarray
    head_height: float
    com_velocity: np.ndarray
    end_effector_positions: np.ndarray
    torso_up: float
    strength: float
    com_height: float = field(repr=False, default=0.0)   # carried for rewards
    com_x: float = field(repr=False, default=0.0)
    feet_distance: float = field(repr=False, default=0.0)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([
            self.joint_angles, self.joint_velocities, [self.head_height],
            self.com_velocity, self.end_effector_positions.ravel(),
            [self.torso_up], [self.strength],
        ])


def observation_dim(model: CharacterModel) -> int:
    """Flat observation width for a character variant."""
    j = model.action_dim
    e = len(model.end_effectors)
    return 2 * j + 2 * e + 5


def observe_weak(state: SimState, model: CharacterModel, beta: float) -> ObservationWeak:
    """Assemble the weak-stage observation; invariant to horizontal translation."""
    if not 0.0 < beta <= 1.0:
        raise ContractError(f"strength multiplier must be in (0, 1], got {beta}")
    base = 0 if model.fixed_root else 3
    fk = forward_kinematics(model, state.q, state.qdot)
    return ObservationWeak(
        joint_angles=state.q[base:].copy(),
        joint_velocities=state.qdot[base:].copy(),
        head_height=fk.head_height,
        com_velocity=fk.com_velocity.copy(),
        end_effector_positions=fk.end_effector_egocentric.copy(),
        torso_up=fk.torso_up,
        strength=float(beta),
        com_height=float(fk.com[1]),
        com_x=float(fk.com[0]),
        feet_distance=fk.feet_distance,
    )


class GetUpEnv:
    """Single-threaded get-up environment over one simulator instance.

    Many instances can run in parallel with independent seeds; one instance
    must not be shared across threads.
    """

    def __init__(self, model: CharacterModel, env_config: EnvConfig | None = None,
                 sim_config: SimConfig | None = None,
                 reward_params: RewardParams | None = None):
        self.model = model
        self.env_config = env_config or EnvConfig()
        self.sim_config = sim_config or SimConfig()
        self.reward_params = reward_params or RewardParams()
        self.torque_limits = model.torque_limits
        self.state: SimState | None = None
        self.steps = 0
        self.diverged = False
        self.log: trajlog.TrajectoryLog | None = None

    # -- initialization --------------------------------------------------

    def spawn_state(self, rng: np.random.Generator) -> SimState:
        model = self.model
        q = np.zeros(model.dof)
        if not model.fixed_root:
            q[0] = 0.0
            q[1] = self.env_config.drop_height
            q[2] = rng.uniform(-np.pi, np.pi)
        lo = model.angle_limits[:, 0]
        hi = model.angle_limits[:, 1]
        base = 0 if model.fixed_root else 3
        q[base:] = rng.uniform(lo, hi)
        return SimState(q, np.zeros(model.dof), 0.0)

    def reset_ragdoll(self, seed: int, log: trajlog.TrajectoryLog | None = None
                      ) -> SimState:
        """Randomized rag-doll fall; deterministic per seed.

        A diverging fall is retried with an incremented sub-seed up to
        ``reset_retries`` times before giving up.
        """
        cfg = self.env_config
        last_error = None
        for attempt in range(cfg.reset_retries + 1):
            rng = np.random.default_rng((int(seed), attempt))
            state = self.spawn_state(rng)
            try:
                for k in range(cfg.ragdoll_steps):
                    action = np.clip(
                        rng.normal(0.0, cfg.ragdoll_action_std,
                                   self.model.action_dim), -1.0, 1.0)
                    torques = self.torque_limits * action
                    state = control_step(self.model, state, torques, self.sim_config)
                    if log is not None:
                        fk = forward_kinematics(self.model, state.q)
                        log.append(trajlog.step_record(
                            k - cfg.ragdoll_steps, trajlog.PHASE_RAGDOLL, state,
                            action, 0.0, None, fk.head_height, fk.com, fk.torso_up))
                self.state = state
                self.steps = 0
                self.diverged = False
                self.log = log
                return state
            except SimulationDivergedError as exc:
                last_error = exc
                if log is not None:
                    log.records.clear()
        raise SimulationDivergedError(
            f"rag-doll reset failed after {cfg.reset_retries + 1} attempts "
            f"(seed {seed}): {last_error}", -1)

    # -- stepping ---------------------------------------------------------

    def observe(self, beta: float) -> ObservationWeak:
        return observe_weak(self.state, self.model, beta)

    def step(self, action: np.ndarray, beta: float):
        """One 40 Hz control step with torque action scaled by the limits.

        Returns (state, observation, reward breakdown, done). The action must
        already be bounded by the sampled strength multiplier. Divergence ends
        the episode with zero reward and a flag in the log.
        """
        action = np.asarray(action, dtype=float)
        if action.shape != (self.model.action_dim,):
            raise ContractError(
                f"action has shape {action.shape}, expected ({self.model.action_dim},)")
        if np.max(np.abs(action)) > beta + ACTION_BOUND_SLACK:
            raise ContractError(
                f"action exceeds strength bound {beta}: max |a| = "
                f"{np.max(np.abs(action))}")
        torques = self.torque_limits * action
        try:
            self.state = control_step(self.model, self.state, torques, self.sim_config)
        except SimulationDivergedError:
            self.diverged = True
            self.steps += 1
            obs = None
            zero = RewardBreakdown({"diverged": 0.0}, 0.0)
            if self.log is not None:
                self.log.append({"step": self.steps, "phase": trajlog.PHASE_GETUP,
                                 "diverged": True})
            return self.state, obs, zero, True
        self.steps += 1
        obs = self.observe(beta)
        reward = self._reward(obs, action)
        done = self.steps >= self.env_config.episode_steps
        if self.log is not None:
            self.log.append(trajlog.step_record(
                self.steps, trajlog.PHASE_GETUP, self.state, action, beta,
                reward.as_dict(), obs.head_height,
                (obs.com_x, obs.com_height), obs.torso_up))
        return self.state, obs, reward, done

    def _reward(self, obs: ObservationWeak, action: np.ndarray) -> RewardBreakdown:
        breakdown = reward_weak(
            obs.head_height, obs.com_height, obs.torso_up,
            float(obs.com_velocity[0]), obs.feet_distance, self.reward_params)
        p = self.reward_params
        if p.energy_cost_weight > 0 or p.joint_velocity_penalty_weight > 0:
            terms = dict(breakdown.terms)
            total = breakdown.total
            if p.energy_cost_weight > 0:
                r_energy = float(np.exp(-p.energy_cost_weight * np.mean(action ** 2)))
                terms["r_energy"] = r_energy
                total *= r_energy
            if p.joint_velocity_penalty_weight > 0:
                r_qdot = float(np.exp(
                    -p.joint_velocity_penalty_weight
                    * np.mean(obs.joint_velocities ** 2)))
                terms["r_joint_velocity"] = r_qdot
                total *= r_qdot
            breakdown = RewardBreakdown(terms, total)
        return breakdown
