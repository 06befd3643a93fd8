"""Soft actor-critic with twin critics, a tanh-squashed Gaussian policy whose
squash scale tracks the strength multiplier, and automatic temperature tuning.

The trainer owns all mutable learning state and is single-threaded; update
order per step is critics, actor, temperature, then soft target update.
Gradients are hand-derived and validated against finite differences in the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError, TrainingDivergedError
from .nets import MLP, Adam, log1m_tanh2

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass
class SacConfig:
    """Learning hyperparameters; defaults follow the stock training recipe."""

    hidden: tuple = (256, 256)
    batch_size: int = 256
    critic_lr: float = 1e-4
    actor_lr: float = 1e-5
    temperature_lr: float = 1e-4
    initial_temperature: float = 0.1
    target_update_rate: float = 5e-3
    discount: float = 0.97
    reward_scale: float = 1.0
    updates_per_step: int = 1
    warmup_steps: int = 10000
    replay_capacity: int = 1_000_000
    log_std_min: float = -5.0
    log_std_max: float = 2.0
    target_entropy: float | None = None   # None -> -action_dim

    def __post_init__(self):
        if not 0.0 < self.target_update_rate <= 1.0:
            raise ConfigurationError("target update rate must be in (0, 1]")
        if not 0.0 < self.discount < 1.0:
            raise ConfigurationError("discount must be in (0, 1)")
        for name in ("critic_lr", "actor_lr", "temperature_lr"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


class SquashedGaussianPolicy:
    """Gaussian-in-pre-tanh policy: a = scale * tanh(u), u ~ N(mean, std).

    The trunk emits (mean, log_std) per action dimension; log_std is clamped
    to [log_std_min, log_std_max]. ``scale`` may be a scalar or a per-sample
    column and bounds every sampled action component strictly.
    """

    def __init__(self, obs_dim: int, action_dim: int, hidden, rng,
                 log_std_min: float = -5.0, log_std_max: float = 2.0):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.log_std_min = log_std_min
        self.log_std_max = log_std_max
        self.trunk = MLP([obs_dim, *hidden, 2 * action_dim], rng, final_scale=1e-2)

    def _heads(self, obs):
        out, cache = self.trunk.forward(obs)
        mean = out[:, :self.action_dim]
        log_std_raw = out[:, self.action_dim:]
        log_std = np.clip(log_std_raw, self.log_std_min, self.log_std_max)
        return mean, log_std, log_std_raw, cache

    def sample(self, obs: np.ndarray, scale, rng: np.random.Generator | None = None,
               deterministic: bool = False, noise: np.ndarray | None = None):
        """Returns (action, log_prob, details) for a batch of observations.

        ``noise`` may pin the standard-normal draw (tests); otherwise it comes
        from ``rng``. Deterministic mode squashes the mean and reports the
        density at that point.
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        scale = np.asarray(scale, dtype=float)
        if scale.ndim == 0:
            scale = np.full((obs.shape[0], 1), float(scale))
        else:
            scale = scale.reshape(obs.shape[0], 1)
        if np.any(scale <= 0):
            raise ContractError("squash scale must be positive")
        mean, log_std, log_std_raw, cache = self._heads(obs)
        if not np.isfinite(mean).all() or not np.isfinite(log_std_raw).all():
            raise TrainingDivergedError("non-finite policy network output")
        std = np.exp(log_std)
        if deterministic:
            eps = np.zeros_like(mean)
        elif noise is not None:
            eps = noise
        else:
            eps = rng.standard_normal(mean.shape)
        u = mean + std * eps
        t = np.tanh(u)
        action = scale * t
        log_prob = (
            -0.5 * eps ** 2 - log_std - 0.5 * LOG_TWO_PI
            - np.log(scale) - log1m_tanh2(u)
        ).sum(axis=1)
        details = {"mean": mean, "log_std": log_std, "log_std_raw": log_std_raw,
                   "std": std, "eps": eps, "u": u, "tanh_u": t, "scale": scale,
                   "cache": cache}
        return action, log_prob, details

    def log_prob_of(self, obs: np.ndarray, action: np.ndarray, scale) -> np.ndarray:
        """Log density of given actions (change of variables through the squash)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        action = np.atleast_2d(np.asarray(action, dtype=float))
        scale = np.asarray(scale, dtype=float)
        if scale.ndim == 0:
            scale = np.full((obs.shape[0], 1), float(scale))
        else:
            scale = scale.reshape(obs.shape[0], 1)
        mean, log_std, _, _ = self._heads(obs)
        std = np.exp(log_std)
        ratio = np.clip(action / scale, -1.0 + 1e-15, 1.0 - 1e-15)
        u = np.arctanh(ratio)
        z = (u - mean) / std
        return (
            -0.5 * z ** 2 - log_std - 0.5 * LOG_TWO_PI
            - np.log(scale) - log1m_tanh2(u)
        ).sum(axis=1)


def policy_act(policy: SquashedGaussianPolicy, observation: np.ndarray,
               scale: float, rng: np.random.Generator | None = None,
               deterministic: bool = False):
    """Single-observation action draw: returns (action, log_prob)."""
    if not 0.0 < scale <= 1.0:
        raise ContractError(f"strength multiplier must be in (0, 1], got {scale}")
    a, lp, _ = policy.sample(observation[None, :], scale, rng=rng,
                             deterministic=deterministic)
    return a[0], float(lp[0])


class Critic:
    """Action-value network over concatenated (observation, action)."""

    def __init__(self, obs_dim: int, action_dim: int, hidden, rng):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.net = MLP([obs_dim + action_dim, *hidden, 1], rng)

    def forward(self, obs, action):
        x = np.concatenate([obs, action], axis=1)
        out, cache = self.net.forward(x)
        return out[:, 0], cache


class ReplayBuffer:
    """Fixed-capacity FIFO transition store.

    Actions are stored in their absolute, strength-scaled form so that data
    collected at different curriculum stages keeps one physical meaning; the
    per-transition squash scale rides along for target-policy sampling.
    """

    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        if capacity < 1:
            raise ConfigurationError("replay capacity must be >= 1")
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.action = np.zeros((capacity, action_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.scale = np.ones(capacity)
        self.index = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward, next_obs, done, scale):
        i = self.index
        self.obs[i] = obs
        self.action[i] = action
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = 1.0 if done else 0.0
        self.scale[i] = scale
        self.index = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "obs": self.obs[idx], "action": self.action[idx],
            "reward": self.reward[idx], "next_obs": self.next_obs[idx],
            "done": self.done[idx], "scale": self.scale[idx],
        }

    def state_arrays(self) -> dict:
        return {"obs": self.obs, "action": self.action, "reward": self.reward,
                "next_obs": self.next_obs, "done": self.done, "scale": self.scale}


class SacTrainer:
    """Owns the policy, twin critics and temperature, plus their optimizers."""

    def __init__(self, obs_dim: int, action_dim: int, config: SacConfig | None = None,
                 seed: int = 0):
        self.config = config or SacConfig()
        cfg = self.config
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.rng = np.random.default_rng((int(seed), 0x5AC))
        self.policy = SquashedGaussianPolicy(
            obs_dim, action_dim, cfg.hidden, self.rng,
            log_std_min=cfg.log_std_min, log_std_max=cfg.log_std_max)
        self.q1 = Critic(obs_dim, action_dim, cfg.hidden, self.rng)
        self.q2 = Critic(obs_dim, action_dim, cfg.hidden, self.rng)
        self.q1_target = Critic.__new__(Critic)
        self.q1_target.__dict__.update(
            {"obs_dim": obs_dim, "action_dim": action_dim, "net": self.q1.net.copy()})
        self.q2_target = Critic.__new__(Critic)
        self.q2_target.__dict__.update(
            {"obs_dim": obs_dim, "action_dim": action_dim, "net": self.q2.net.copy()})
        self.log_alpha = np.array([math.log(cfg.initial_temperature)])
        self.target_entropy = (
            cfg.target_entropy if cfg.target_entropy is not None else -float(action_dim))
        self.buffer = ReplayBuffer(cfg.replay_capacity, obs_dim, action_dim)
        self.actor_opt = Adam(self.policy.trunk.parameters(), cfg.actor_lr)
        self.q1_opt = Adam(self.q1.net.parameters(), cfg.critic_lr)
        self.q2_opt = Adam(self.q2.net.parameters(), cfg.critic_lr)
        self.alpha_opt = Adam([self.log_alpha], cfg.temperature_lr)
        self.updates_done = 0

    # -- acting ----------------------------------------------------------

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    def act(self, obs: np.ndarray, scale: float, deterministic: bool = False):
        return policy_act(self.policy, obs, scale, rng=self.rng,
                          deterministic=deterministic)

    # -- losses (pure in the parameters, given frozen noise) --------------

    def critic_targets(self, batch: dict, noise: np.ndarray) -> np.ndarray:
        cfg = self.config
        a_next, logp_next, _ = self.policy.sample(
            batch["next_obs"], batch["scale"], noise=noise)
        q1t, _ = self.q1_target.forward(batch["next_obs"], a_next)
        q2t, _ = self.q2_target.forward(batch["next_obs"], a_next)
        soft_value = np.minimum(q1t, q2t) - self.alpha * logp_next
        return cfg.reward_scale * batch["reward"] \
            + cfg.discount * (1.0 - batch["done"]) * soft_value

    def critic_loss(self, batch: dict, noise: np.ndarray) -> float:
        y = self.critic_targets(batch, noise)
        q1, _ = self.q1.forward(batch["obs"], batch["action"])
        q2, _ = self.q2.forward(batch["obs"], batch["action"])
        return float(np.mean((q1 - y) ** 2) + np.mean((q2 - y) ** 2))

    def critic_grads(self, batch: dict, noise: np.ndarray):
        y = self.critic_targets(batch, noise)
        B = len(y)
        out = []
        loss = 0.0
        for critic in (self.q1, self.q2):
            q, cache = critic.forward(batch["obs"], batch["action"])
            err = q - y
            loss += float(np.mean(err ** 2))
            grads, _ = critic.net.backward(cache, (2.0 / B) * err[:, None])
            out.append(grads)
        return loss, out[0], out[1], y

    def actor_loss(self, batch: dict, noise: np.ndarray) -> float:
        a, logp, _ = self.policy.sample(batch["obs"], batch["scale"], noise=noise)
        q1, _ = self.q1.forward(batch["obs"], a)
        q2, _ = self.q2.forward(batch["obs"], a)
        return float(np.mean(self.alpha * logp - np.minimum(q1, q2)))

    def actor_grads(self, batch: dict, noise: np.ndarray):
        """Hand-derived reparameterized gradient of the actor loss.

        For u = mean + std*eps and a = scale*tanh(u), the total derivative of
        log pi w.r.t. the mean head is 2*tanh(u) and w.r.t. the log-std head
        is 2*tanh(u)*std*eps - 1 (the Gaussian terms cancel against the
        change-of-variables terms along the u path).
        """
        obs = batch["obs"]
        B = obs.shape[0]
        alpha = self.alpha
        a, logp, d = self.policy.sample(obs, batch["scale"], noise=noise)
        q1, c1 = self.q1.forward(obs, a)
        q2, c2 = self.q2.forward(obs, a)
        loss = float(np.mean(alpha * logp - np.minimum(q1, q2)))
        pick1 = (q1 <= q2)[:, None]
        g_out = -np.ones((B, 1)) / B
        _, gx1 = self.q1.net.backward(c1, g_out * pick1)
        _, gx2 = self.q2.net.backward(c2, g_out * (~pick1))
        g_action = gx1[:, self.obs_dim:] + gx2[:, self.obs_dim:]

        t = d["tanh_u"]
        dsquash = d["scale"] * (1.0 - t ** 2)
        g_mean = (alpha / B) * (2.0 * t) + g_action * dsquash
        g_logstd = ((alpha / B) * (2.0 * t * d["std"] * d["eps"] - 1.0)
                    + g_action * dsquash * d["std"] * d["eps"])
        clip_mask = ((d["log_std_raw"] > self.policy.log_std_min)
                     & (d["log_std_raw"] < self.policy.log_std_max))
        g_logstd = g_logstd * clip_mask
        g_heads = np.concatenate([g_mean, g_logstd], axis=1)
        grads, _ = self.policy.trunk.backward(d["cache"], g_heads)
        return loss, grads, logp

    def temperature_loss(self, logp: np.ndarray, log_alpha: float | None = None) -> float:
        la = float(self.log_alpha[0]) if log_alpha is None else float(log_alpha)
        return float(-la * np.mean(logp + self.target_entropy))

    def temperature_grad(self, logp: np.ndarray) -> float:
        return float(-np.mean(logp + self.target_entropy))

    # -- the update ----------------------------------------------------

    def update(self, batch: dict | None = None) -> dict:
        """One gradient step each for critics, actor and temperature, then a
        soft target update. Returns scalar diagnostics."""
        cfg = self.config
        if batch is None:
            if len(self.buffer) < cfg.batch_size:
                raise ContractError("replay buffer smaller than one batch")
            batch = self.buffer.sample(cfg.batch_size, self.rng)
        B = batch["obs"].shape[0]
        noise_next = self.rng.standard_normal((B, self.action_dim))
        closs, g1, g2, y = self.critic_grads(batch, noise_next)
        self.q1_opt.step(self.q1.net.parameters(), g1)
        self.q2_opt.step(self.q2.net.parameters(), g2)

        noise_pi = self.rng.standard_normal((B, self.action_dim))
        aloss, ga, logp = self.actor_grads(batch, noise_pi)
        self.actor_opt.step(self.policy.trunk.parameters(), ga)

        tloss = self.temperature_loss(logp)
        self.alpha_opt.step([self.log_alpha],
                            [np.array([self.temperature_grad(logp)])])

        self.soft_update()
        self.updates_done += 1
        diag = {"critic_loss": closs, "actor_loss": aloss,
                "temperature_loss": tloss, "alpha": self.alpha,
                "target_mean": float(np.mean(y)),
                "entropy_estimate": float(-np.mean(logp))}
        if not all(np.isfinite(v) for v in diag.values()):
            raise TrainingDivergedError("non-finite loss", diag)
        return diag

    def soft_update(self, rate: float | None = None):
        tau = self.config.target_update_rate if rate is None else rate
        for online, target in ((self.q1, self.q1_target), (self.q2, self.q2_target)):
            for p, pt in zip(online.net.parameters(), target.net.parameters()):
                pt += tau * (p - pt)

    # -- persistence -----------------------------------------------------

    def named_parameter_arrays(self) -> list:
        """(name, array) pairs covering every learnable and optimizer array,
        in a stable declared order for checkpoint payloads."""
        out = []

        def net(prefix, params):
            for i, p in enumerate(params):
                out.append((f"{prefix}.{i}", p))

        net("actor", self.policy.trunk.parameters())
        net("q1", self.q1.net.parameters())
        net("q2", self.q2.net.parameters())
        net("q1_target", self.q1_target.net.parameters())
        net("q2_target", self.q2_target.net.parameters())
        out.append(("log_alpha", self.log_alpha))
        net("actor_adam", self.actor_opt.state_arrays())
        net("q1_adam", self.q1_opt.state_arrays())
        net("q2_adam", self.q2_opt.state_arrays())
        net("alpha_adam", self.alpha_opt.state_arrays())
        return out

    def load_parameter_arrays(self, arrays: dict, counters: dict):
        def net_params(prefix, count):
            return [arrays[f"{prefix}.{i}"] for i in range(count)]

        n_actor = len(self.policy.trunk.parameters())
        n_q = len(self.q1.net.parameters())
        self.policy.trunk.set_parameters(net_params("actor", n_actor))
        self.q1.net.set_parameters(net_params("q1", n_q))
        self.q2.net.set_parameters(net_params("q2", n_q))
        self.q1_target.net.set_parameters(net_params("q1_target", n_q))
        self.q2_target.net.set_parameters(net_params("q2_target", n_q))
        self.log_alpha = np.asarray(arrays["log_alpha"], dtype=float)
        self.actor_opt.load_state_arrays(
            net_params("actor_adam", 2 * n_actor), counters["actor_adam_t"])
        self.q1_opt.load_state_arrays(net_params("q1_adam", 2 * n_q),
                                      counters["q1_adam_t"])
        self.q2_opt.load_state_arrays(net_params("q2_adam", 2 * n_q),
                                      counters["q2_adam_t"])
        self.alpha_opt.load_state_arrays(net_params("alpha_adam", 2),
                                         counters["alpha_adam_t"])
        # rebind the alpha optimizer to the freshly loaded array
        self.updates_done = counters["updates_done"]


def evaluate(act_fn, env_factory, seeds, beta: float, episode_steps: int | None = None):
    """Deterministic-mode rollouts from fixed initial seeds.

    ``act_fn(obs_vector) -> action`` must already be deterministic;
    ``env_factory()`` builds a fresh environment per episode. Returns the
    undiscounted return per seed.
    """
    returns = []
    for seed in seeds:
        env = env_factory()
        env.reset_ragdoll(int(seed))
        obs = env.observe(beta)
        total = 0.0
        steps = episode_steps or env.env_config.episode_steps
        for _ in range(steps):
            action = act_fn(obs.vector)
            _, obs, reward, done = env.step(action, beta)
            total += reward.total
            if done:
                break
        returns.append(total)
    return returns
