"""Adam optimizer with bias correction, operating in place on lists of arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, TrainingError


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise TrainingError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise TrainingError("Adam betas must lie in (0, 1)")


def adam_step(state: AdamState, params, grads):
    """One Adam update. params are mutated in place and also returned.

    Moment buffers are allocated on first use and must keep matching shapes
    afterwards.
    """
    if len(params) != len(grads):
        raise DimensionError("adam_step param/grad count", len(params), len(grads))
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for i, (p, g) in enumerate(zip(params, grads)):
        g = np.asarray(g, dtype=float)
        if g.shape != p.shape:
            raise DimensionError(f"adam_step grad shape at index {i}", p.shape, g.shape)
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient at parameter index {i}")
        m = state.first_moment[i]
        v = state.second_moment[i]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params
