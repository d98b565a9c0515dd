"""Multivariate Fourier features on a box domain, with analytic gradients.

Features are phi_i(xbar) = cos(pi * c_i . xbar) on the state scaled to
[-1, 1]^n, where the integer frequency vectors c_i enumerate all of
{0..N}^n.  Cosines make every feature even and 2-periodic in the scaled
coordinates, so value functions and policies built on them wrap around
the angle seam and treat sign-opposite states identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ClampStats:
    """Counts states that had to be clamped into the scaling domain."""

    def __init__(self) -> None:
        self.count = 0


@dataclass(frozen=True, eq=False)
class FourierBasis:
    """Frequency matrix plus scaling box.

    ``frequencies`` has shape (dims, (order+1)**dims); column i is the
    integer frequency vector of feature i.  Columns are in odometer
    order with the first dimension advancing fastest, so column 0 is all
    zeros (the constant feature) and column 1 is (1, 0, ..., 0).
    ``domain`` has shape (dims, 2) holding per-dimension (min, max).
    """

    order: int
    dims: int
    frequencies: np.ndarray
    domain: np.ndarray

    @property
    def size(self) -> int:
        """Number of features, (order+1)**dims."""
        return self.frequencies.shape[1]

    def scale(self, x, clamps: ClampStats | None = None) -> np.ndarray:
        """Affine map of a raw state onto [-1, 1]^dims.

        States outside the domain are clamped to the boundary; if a
        ``ClampStats`` is passed, each such event increments its counter.
        """
        lo = self.domain[:, 0]
        hi = self.domain[:, 1]
        xbar = 2.0 * (np.asarray(x, dtype=float) - lo) / (hi - lo) - 1.0
        if np.any(xbar < -1.0) or np.any(xbar > 1.0):
            if clamps is not None:
                clamps.count += 1
            xbar = np.clip(xbar, -1.0, 1.0)
        return xbar

    def eval(self, xbar) -> np.ndarray:
        """Feature vector cos(pi * c_i . xbar) at a scaled state."""
        return np.cos(np.pi * (np.asarray(xbar, dtype=float) @ self.frequencies))

    def eval_gradient(self, xbar) -> np.ndarray:
        """Jacobian d phi_i / d xbar_j, shape (size, dims)."""
        xbar = np.asarray(xbar, dtype=float)
        phase = np.pi * (xbar @ self.frequencies)
        return (-np.pi * np.sin(phase))[:, None] * self.frequencies.T

    def features(self, x, clamps: ClampStats | None = None) -> np.ndarray:
        """Feature vector at a raw (unscaled) state."""
        return self.eval(self.scale(x, clamps))

    def gradient(self, x, clamps: ClampStats | None = None) -> np.ndarray:
        """Jacobian d phi_i / d x_j in raw coordinates, shape (size, dims).

        Chain-rules the scaled-state Jacobian through the affine scaling,
        so callers never handle domain scale factors themselves.
        """
        chain = 2.0 / (self.domain[:, 1] - self.domain[:, 0])
        return self.eval_gradient(self.scale(x, clamps)) * chain

    def learning_rates(self, base: float) -> np.ndarray:
        """Per-feature step sizes base / ||c_i||_2 (base itself for c = 0).

        High-frequency features learn slower; the constant feature keeps
        the base rate.
        """
        if not base > 0.0:
            raise ValueError(f"base rate must be positive, got {base}")
        norms = np.linalg.norm(self.frequencies, axis=0)
        return base / np.where(norms == 0.0, 1.0, norms)


def build_basis(order: int, domain) -> FourierBasis:
    """Construct the full order-N basis over a box domain.

    ``domain`` is an (dims, 2) array-like of per-dimension (min, max)
    with min < max.  The basis has (order+1)**dims features.
    """
    if order < 0 or int(order) != order:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    domain = np.atleast_2d(np.asarray(domain, dtype=float))
    if domain.ndim != 2 or domain.shape[1] != 2:
        raise ValueError(f"domain must have shape (dims, 2), got {domain.shape}")
    if not np.all(domain[:, 0] < domain[:, 1]):
        raise ValueError("domain must satisfy min < max in every dimension")
    dims = domain.shape[0]
    order = int(order)
    count = (order + 1) ** dims
    index = np.arange(count)
    frequencies = np.stack(
        [(index // (order + 1) ** d) % (order + 1) for d in range(dims)]
    ).astype(float)
    return FourierBasis(order=order, dims=dims, frequencies=frequencies, domain=domain)
