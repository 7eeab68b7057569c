"""Adamax: Adam with an infinity-norm second moment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-7


@dataclass
class AdamaxState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    u: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params) -> "AdamaxState":
        return cls(0, {k: np.zeros_like(v) for k, v in params.items()},
                   {k: np.zeros_like(v) for k, v in params.items()})


def adamax_step(params, grads, state: AdamaxState, lr: float = 0.001,
                beta1: float = BETA1, beta2: float = BETA2, eps: float = EPSILON):
    """One in-place update of ``params``; returns (params, state).

    m <- b1 m + (1 - b1) g;  u <- max(b2 u, |g|);  p <- p - lr / (1 - b1^t) * m / (u + eps)
    """
    if not state.m:
        state.m = {k: np.zeros_like(v) for k, v in params.items()}
        state.u = {k: np.zeros_like(v) for k, v in params.items()}
    state.step += 1
    step_size = lr / (1.0 - beta1 ** state.step)
    for name, p in params.items():
        g = grads[name]
        m = state.m[name]
        u = state.u[name]
        m *= beta1
        m += (1.0 - beta1) * g
        np.maximum(beta2 * u, np.abs(g), out=u)
        p -= (step_size * m / (u + eps)).astype(p.dtype, copy=False)
    return params, state
