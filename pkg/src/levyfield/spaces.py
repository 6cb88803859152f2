"""Weighted sequence-space norms on spectral truncations.

The ambient spaces of the diagonal framework are weighted little-ell
spaces: a weight sequence ``w`` and an exponent ``q`` define
``|x| = (sum_j (w_j |x_j|)^q)^(1/q)``.  On a finite truncation every such
norm is exactly computable, which is what all the regularity and
operator-norm diagnostics rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpaceSpec:
    """A weighted l^q space restricted to a finite mode set.

    ``weights`` holds one positive weight per retained mode.  ``role`` is a
    free-form tag ("H", "U", "E", "F") used only for reporting.
    """

    exponent_q: float
    weights: np.ndarray
    role: str = "E"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(w > 0):
            raise ValueError("weights must be positive")
        if self.exponent_q < 1:
            raise ValueError("exponent_q must be >= 1")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size

    def norm(self, x: np.ndarray) -> float:
        """Weighted l^q norm of a coefficient vector (or batch, last axis = modes)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coefficients, got {x.shape[-1]}")
        wx = np.abs(x) * self.weights
        if np.isinf(self.exponent_q):
            return wx.max(axis=-1)
        return (wx ** self.exponent_q).sum(axis=-1) ** (1.0 / self.exponent_q)

    @classmethod
    def power_law(cls, lambdas: np.ndarray, exponent: float, q: float, role: str = "E") -> "SpaceSpec":
        """Weights lambda_j^exponent; exponent < 0 gives the a^{-1}-type dual weighting."""
        lam = np.asarray(lambdas, dtype=float)
        return cls(exponent_q=q, weights=lam ** exponent, role=role)

    @classmethod
    def hilbert_scale(cls, mu: np.ndarray, order: float, role: str = "H") -> "SpaceSpec":
        """Sobolev-type Hilbert space of the given order over Laplacian eigenvalues mu.

        The squared norm is sum_j mu_j^order x_j^2, so the per-mode weight is
        mu_j^(order/2).
        """
        mu = np.asarray(mu, dtype=float)
        return cls(exponent_q=2.0, weights=mu ** (order / 2.0), role=role)
