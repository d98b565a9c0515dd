"""Temporal-difference actor-critic for the energy-shaping policy.

One learning step executes, in order: draw exploration noise and apply
the saturated action; observe the next state and reward; form the TD
error; update the critic through its eligibility trace; then update both
actors (potential shaping and damping gain) along the saturated policy
gradients evaluated at the visited state with the pre-update parameters.
Per-feature learning rates decay with the frequency norm of each basis
function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import FourierBasis, build_basis
from .ph import DivergenceError, step
from .policy import EnergyShapingPolicy, PolicyParams

# A run is declared diverged when any parameter leaves this range; the
# learned energy landscape is supposed to stay bounded throughout.
PARAM_LIMIT = 1.0e9


@dataclass
class LearnerConfig:
    """Learning and simulation settings (defaults: pendulum benchmark)."""

    discount: float = 0.97
    trace_decay: float = 0.65
    critic_rate: float = 0.05
    shaping_rate: float = 1.0e-10
    damping_rate: float = 0.2
    noise_std: float = 1.0
    u_max: float = 3.0
    sample_time: float = 0.03
    trial_duration: float = 3.0
    trials: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.discount < 1.0):
            raise ValueError(f"discount must lie in [0, 1), got {self.discount}")
        if not (0.0 <= self.trace_decay < 1.0):
            raise ValueError(f"trace_decay must lie in [0, 1), got {self.trace_decay}")
        for name in ("critic_rate", "shaping_rate", "damping_rate", "u_max",
                     "sample_time", "trial_duration"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_std < 0.0:
            raise ValueError(f"noise_std must be nonnegative, got {self.noise_std}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")

    @property
    def steps_per_trial(self) -> int:
        return int(math.ceil(self.trial_duration / self.sample_time - 1e-9))


@dataclass
class CriticState:
    """Linear value-function weights and their eligibility trace."""

    weights: np.ndarray
    trace: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        self.trace = np.asarray(self.trace, dtype=float)
        if self.weights.shape != self.trace.shape:
            raise ValueError("weights and trace must have the same length")

    @classmethod
    def zeros(cls, size: int) -> "CriticState":
        return cls(np.zeros(size), np.zeros(size))

    def reset_trace(self) -> None:
        self.trace[:] = 0.0

    def copy(self) -> "CriticState":
        return CriticState(self.weights.copy(), self.trace.copy())


def value(weights: np.ndarray, basis: FourierBasis, x) -> float:
    """Approximate value weights . phi(x)."""
    return float(weights @ basis.features(x))


def td_error(reward: float, v_next: float, v_cur: float, discount: float) -> float:
    """One-step Bellman residual r + discount * V(x') - V(x)."""
    return reward + discount * v_next - v_cur


def critic_update(critic: CriticState, delta: float, features: np.ndarray,
                  discount: float, trace_decay: float, rate: float) -> CriticState:
    """Accumulate the eligibility trace, then step the weights along it.

    Mutates ``critic`` in place and returns it.  With trace_decay = 0
    this is exactly TD(0).
    """
    critic.trace *= discount * trace_decay
    critic.trace += features
    critic.weights += rate * delta * critic.trace
    return critic


def explore(u_hat: np.ndarray, noise_std: float, u_max: float,
            rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Perturb the policy output and clamp; report the effective noise.

    Returns the applied action and du_bar = applied - u_hat, the
    exploration term actually experienced by the plant (reshaped by the
    saturation, so no longer normally distributed near the bounds).
    """
    u_hat = np.asarray(u_hat, dtype=float)
    du = rng.normal(0.0, noise_std, size=u_hat.shape)
    u = np.clip(u_hat + du, -u_max, u_max)
    return u, u - u_hat


def actor_update(params: PolicyParams, delta: float, du_bar: np.ndarray,
                 gradients: tuple[np.ndarray, np.ndarray],
                 shaping_rates: np.ndarray,
                 damping_rates: np.ndarray) -> PolicyParams:
    """Step both actors along delta * du_bar * (saturated policy gradient).

    Mutates ``params`` in place and returns it.  The damping update is
    symmetrized over the first two tensor axes (off-diagonal parameter
    pairs are tied), so the gain matrix stays exactly symmetric.
    """
    d_shaping, d_damping = gradients
    params.shaping += shaping_rates * (delta * (du_bar @ d_shaping))
    m = params.damping.shape[0]
    if m == 1:
        params.damping[0, 0] += damping_rates * ((delta * du_bar[0]) * d_damping[0, 0, :, 0])
    else:
        raw = delta * np.einsum("ijlr,r->ijl", d_damping, du_bar)
        update = raw + raw.transpose(1, 0, 2)
        diag = np.arange(m)
        update[diag, diag] = raw[diag, diag]
        params.damping += damping_rates[None, None, :] * update
    return params


def run_trial(model, policy: EnergyShapingPolicy, critic_basis: FourierBasis,
              params: PolicyParams, critic: CriticState, config: LearnerConfig,
              rng: np.random.Generator, x0, reward_fn):
    """One fixed-length trial of learning; mutates ``params`` and ``critic``.

    Returns (states, rewards): the visited states, shape (steps+1, n),
    and the per-step rewards, shape (steps,); the trial's learning-curve
    score is the plain sum of the rewards.  Raises
    :class:`DivergenceError` if the state or any parameter vector blows
    up.
    """
    dt = config.sample_time
    steps = config.steps_per_trial
    discount = config.discount
    shaping_rates = policy.shaping_basis.learning_rates(config.shaping_rate)
    damping_rates = policy.damping_basis.learning_rates(config.damping_rate)

    x = np.asarray(x0, dtype=float)
    states = np.empty((steps + 1, model.n))
    states[0] = x
    rewards = np.empty(steps)
    feats = critic_basis.features(x)

    for k in range(steps):
        u_hat = policy.control(x, params)
        gradients = policy.policy_gradients(x, params, u_hat)
        u, du_bar = explore(u_hat, config.noise_std, policy.u_max, rng)

        x_next = step(model, x, u, dt)
        r = float(reward_fn(x_next, u))

        feats_next = critic_basis.features(x_next)
        v_cur = float(critic.weights @ feats)
        v_next = float(critic.weights @ feats_next)
        delta = td_error(r, v_next, v_cur, discount)
        critic_update(critic, delta, feats, discount, config.trace_decay,
                      config.critic_rate)
        actor_update(params, delta, du_bar, gradients, shaping_rates,
                     damping_rates)

        x = x_next
        feats = feats_next
        states[k + 1] = x
        rewards[k] = r

    bound = max(params.max_abs(), float(np.max(np.abs(critic.weights))))
    if not bound <= PARAM_LIMIT:
        raise DivergenceError(f"learned parameters diverged (max |param| = {bound!r})")
    return states, rewards


def train(model, config: LearnerConfig, reward_fn,
          policy: EnergyShapingPolicy | None = None,
          critic_basis: FourierBasis | None = None,
          x0=None):
    """Run the full learning protocol from zero-initialized parameters.

    Every trial restarts from ``x0`` (default: the pendulum's hanging
    position) with the eligibility trace cleared; parameters carry over.
    Returns (scores, params, critic, metadata) where ``scores`` holds
    the per-trial reward sums.  Divergence in any trial propagates as
    :class:`DivergenceError`.
    """
    if policy is None:
        policy = EnergyShapingPolicy(model, u_max=config.u_max)
    if critic_basis is None:
        critic_basis = build_basis(3, model.domain)
    if x0 is None:
        x0 = np.array([math.pi, 0.0])
    x0 = model.normalize(np.asarray(x0, dtype=float))

    params = policy.zeros()
    critic = CriticState.zeros(critic_basis.size)
    rng = np.random.default_rng(config.seed)
    scores = np.empty(config.trials)
    for trial in range(config.trials):
        critic.reset_trace()
        _, rewards = run_trial(model, policy, critic_basis, params, critic,
                               config, rng, x0, reward_fn)
        scores[trial] = rewards.sum()
    metadata = {
        "seed": config.seed,
        "trials": config.trials,
        "steps_per_trial": config.steps_per_trial,
        "first_score": float(scores[0]),
        "final_score": float(scores[-1]),
    }
    return scores, params, critic, metadata
