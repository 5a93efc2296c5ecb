"""Initial perturbations of the Barenblatt start.

In 1D the pair ``(w0, w1)`` perturbs position and velocity:
``eta = x + w0``, ``eta_t = x/k + w1``.  In 3D the pair is ``(zeta0, zeta1)``
and perturbs the strain: ``eta = r (1 + zeta0)``, ``eta_t = r (1/k + zeta1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

KINDS = ("zero", "translation", "kick", "bump", "dilation", "custom")


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str = "zero"
    epsilon: float = 0.0
    v0: float = 0.0
    x_c: float = 0.0
    sigma: float = 1.0
    w0: Optional[np.ndarray] = None
    w1: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "bump" and not self.sigma > 0:
            raise ValueError("bump width sigma must be positive")
        if self.kind == "custom" and (self.w0 is None or self.w1 is None):
            raise ValueError("custom perturbation needs sampled w0 and w1")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def translation(cls, epsilon):
        return cls("translation", epsilon=epsilon)

    @classmethod
    def kick(cls, v0):
        return cls("kick", v0=v0)

    @classmethod
    def bump(cls, epsilon, x_c, sigma):
        return cls("bump", epsilon=epsilon, x_c=x_c, sigma=sigma)

    @classmethod
    def dilation(cls, epsilon):
        return cls("dilation", epsilon=epsilon)

    @classmethod
    def custom(cls, w0, w1):
        return cls("custom", w0=np.asarray(w0, dtype=float), w1=np.asarray(w1, dtype=float))

    def fields(self, x, dim: int = 1):
        """Sampled perturbation pair on the nodes ``x``."""
        x = np.asarray(x, dtype=float)
        zero = np.zeros_like(x)
        if self.kind == "zero":
            return zero, zero.copy()
        if self.kind == "translation":
            if dim != 1:
                raise ValueError("translation breaks spherical symmetry; use dilation in 3D")
            return np.full_like(x, self.epsilon), zero
        if self.kind == "kick":
            return zero, np.full_like(x, self.v0)
        if self.kind == "bump":
            return self.epsilon * np.exp(-((x - self.x_c) / self.sigma) ** 2), zero
        if self.kind == "dilation":
            return (self.epsilon * x if dim == 1 else np.full_like(x, self.epsilon)), zero
        if self.w0.shape != x.shape or self.w1.shape != x.shape:
            raise ValueError(f"custom perturbation sampled on {self.w0.shape}, grid has {x.shape}")
        return self.w0.copy(), self.w1.copy()
