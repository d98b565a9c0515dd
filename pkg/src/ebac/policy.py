"""Learnable energy-shaping and damping-injection control with saturation.

For a fully actuated mechanical PH system (state x = (q, p), input map
g = [0, G]^T) only the potential energy can be reshaped: the kinetic
part of any admissible desired energy must match the plant's.  The
desired closed-loop energy is therefore

    Hd(x, shaping) = p^T M^{-1}(q) p / 2 + Pd(q, shaping)

with a learnable potential Pd(q) = shaping . phi(q) on a Fourier basis,
and the damping fed back through a learnable symmetric gain

    K(x, damping)_ij = sum_l damping[i, j, l] * phiK(x)_l.

The control law splits into a potential-reshaping part and a damping
part,

    u = -G^{-1} (grad_q Pd - grad_q P) - K G^T M^{-1} p,

which renders the closed loop xdot = [J - R - g K g^T] grad Hd whenever
the actuator is not saturated.  K is deliberately not constrained to be
positive: negative values pump energy into the plant, which is how a
saturated pendulum escapes its potential well.  Gradients of the
saturated law are exact: rows of the parameter Jacobians are zeroed
whenever the corresponding input channel is saturated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import FourierBasis, build_basis
from .ph import dynamics

DEFAULT_U_MAX = 3.0


def saturate(u, u_max: float):
    """Componentwise clamp of the control to [-u_max, u_max]."""
    return np.clip(u, -u_max, u_max)


@dataclass
class PolicyParams:
    """Actor parameters: potential-shaping weights and damping-gain tensor.

    ``shaping`` has shape (e,); ``damping`` has shape (m, m, f) and is
    symmetric in its first two axes, which keeps the damping gain matrix
    symmetric for every state.  Updates preserve the symmetry exactly.
    """

    shaping: np.ndarray
    damping: np.ndarray

    def __post_init__(self) -> None:
        self.shaping = np.asarray(self.shaping, dtype=float)
        self.damping = np.asarray(self.damping, dtype=float)
        if self.damping.ndim != 3 or self.damping.shape[0] != self.damping.shape[1]:
            raise ValueError(f"damping tensor must have shape (m, m, f), got {self.damping.shape}")
        if not np.array_equal(self.damping, self.damping.transpose(1, 0, 2)):
            raise ValueError("damping tensor must be symmetric in its first two axes")

    @classmethod
    def zeros(cls, shaping_size: int, m: int, damping_size: int) -> "PolicyParams":
        return cls(np.zeros(shaping_size), np.zeros((m, m, damping_size)))

    @property
    def psi(self) -> np.ndarray:
        """Damping weights as a flat vector (single-input systems)."""
        if self.damping.shape[0] != 1:
            raise ValueError("psi is only defined for single-input systems")
        return self.damping[0, 0]

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.shaping.copy(), self.damping.copy())

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.shaping))), float(np.max(np.abs(self.damping))))


class EnergyShapingPolicy:
    """Saturated energy-shaping control law for a mechanical PH model.

    The model must expose the mechanical structure used by the law:
    ``nq``, ``mass_inv(q)``, ``grad_potential(q)`` and ``input_block()``
    (the lower block G of g = [0, G]^T).  Default bases follow the
    pendulum benchmark: a 3rd-order basis in q for the potential and a
    3rd-order basis over the full state domain for the damping gain.
    """

    def __init__(self, model, u_max: float = DEFAULT_U_MAX,
                 shaping_basis: FourierBasis | None = None,
                 damping_basis: FourierBasis | None = None):
        if not u_max > 0.0:
            raise ValueError(f"u_max must be positive, got {u_max}")
        self.model = model
        self.u_max = float(u_max)
        self.shaping_basis = (shaping_basis if shaping_basis is not None
                              else build_basis(3, model.domain[: model.nq]))
        self.damping_basis = (damping_basis if damping_basis is not None
                              else build_basis(3, model.domain))
        G = model.input_block()
        self._g_inv = np.linalg.inv(G)
        self._g_block = G

    def zeros(self) -> PolicyParams:
        return PolicyParams.zeros(self.shaping_basis.size, self.model.m,
                                  self.damping_basis.size)

    def desired_potential(self, q, shaping: np.ndarray) -> float:
        """Learned potential Pd(q) = shaping . phi(q) in joules."""
        return float(shaping @ self.shaping_basis.features(np.atleast_1d(q)))

    def desired_potential_gradient(self, q, shaping: np.ndarray) -> np.ndarray:
        """grad_q Pd, shape (nq,).  Zero at q = 0 for every shaping vector."""
        return self.shaping_basis.gradient(np.atleast_1d(q)).T @ shaping

    def desired_hamiltonian(self, x, shaping: np.ndarray) -> float:
        """Desired closed-loop energy: plant kinetic term plus Pd(q)."""
        x = np.asarray(x, dtype=float)
        q, p = x[: self.model.nq], x[self.model.nq:]
        kinetic = 0.5 * float(p @ self.model.mass_inv(q) @ p)
        return kinetic + self.desired_potential(q, shaping)

    def desired_hamiltonian_gradient(self, x, shaping: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        q, p = x[: self.model.nq], x[self.model.nq:]
        return np.concatenate([
            self.desired_potential_gradient(q, shaping),
            self.model.mass_inv(q) @ p,
        ])

    def damping_gain(self, x, damping: np.ndarray) -> np.ndarray:
        """Damping gain matrix K(x), symmetric, deliberately sign-indefinite."""
        phi = self.damping_basis.features(np.asarray(x, dtype=float))
        return damping @ phi

    def control(self, x, params: PolicyParams) -> np.ndarray:
        """Unsaturated control: potential reshaping plus damping feedback."""
        x = np.asarray(x, dtype=float)
        q, p = x[: self.model.nq], x[self.model.nq:]
        grad_mismatch = (self.desired_potential_gradient(q, params.shaping)
                         - self.model.grad_potential(q))
        u_shape = -self._g_inv @ grad_mismatch
        velocity = self._g_block.T @ (self.model.mass_inv(q) @ p)
        u_damp = -self.damping_gain(x, params.damping) @ velocity
        return u_shape + u_damp

    def saturate(self, u) -> np.ndarray:
        return saturate(u, self.u_max)

    def policy_gradients(self, x, params: PolicyParams,
                         u_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Parameter Jacobians of the saturated control law.

        ``u_hat`` must be the unsaturated control at ``x`` with the same
        parameters.  Returns

        * ``d_shaping`` of shape (m, e): row r is the gradient of the
          r-th saturated input w.r.t. the shaping weights;
        * ``d_damping`` of shape (m, m, f, m): entry [i, j, l, r] is the
          partial of the r-th saturated input w.r.t. damping[i, j, l],
          ignoring the symmetry tie (the actor update symmetrizes).

        Saturated input channels (|u_hat_r| > u_max) contribute zero
        gradients; ties |u_hat_r| = u_max pass through.
        """
        x = np.asarray(x, dtype=float)
        m = self.model.m
        q, p = x[: self.model.nq], x[self.model.nq:]
        mask = (np.abs(np.asarray(u_hat, dtype=float)) <= self.u_max).astype(float)
        d_shaping = -(self._g_inv @ self.shaping_basis.gradient(q).T)
        d_shaping = d_shaping * mask[:, None]
        phi = self.damping_basis.features(x)
        velocity = self._g_block.T @ (self.model.mass_inv(q) @ p)
        d_damping = np.zeros((m, m, self.damping_basis.size, m))
        for i in range(m):
            if mask[i]:
                d_damping[i, :, :, i] = -np.outer(velocity, phi)
        return d_shaping, d_damping

    def closed_loop_hd_rate(self, x, params: PolicyParams,
                            saturated: bool = False) -> float:
        """Time derivative of the desired energy along the closed loop.

        Uses the chain rule grad(Hd) . xdot with the learned control
        (clamped if ``saturated``).  In the unsaturated case this equals
        -grad(Hd)^T (R + g K g^T) grad(Hd), so it is nonpositive exactly
        where the damping gain keeps R + g K g^T positive semidefinite.
        """
        x = np.asarray(x, dtype=float)
        u = self.control(x, params)
        if saturated:
            u = self.saturate(u)
        xdot = dynamics(self.model, x, u)
        return float(self.desired_hamiltonian_gradient(x, params.shaping) @ xdot)
