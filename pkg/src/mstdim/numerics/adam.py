"""Adam with bias correction, operating in place on parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, TrainingError
from .tensor import Tensor


@dataclass
class AdamState:
    """First/second moment accumulators plus step counter and hyperparameters."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 3e-4

    @classmethod
    def for_params(
        cls,
        params: list[Tensor],
        lr: float = 3e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            lr=lr,
        )


def adam_step(
    params: list[Tensor],
    grads: list[np.ndarray] | None,
    state: AdamState,
) -> tuple[list[Tensor], AdamState]:
    """One Adam update. `grads` defaults to each parameter's `.grad` buffer."""
    if grads is None:
        grads = [p.grad for p in params]  # type: ignore[misc]
    if len(grads) != len(params) or len(state.m) != len(params):
        raise ConfigurationError("adam_step: params, grads and state lengths differ")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            continue
        if g.shape != p.data.shape:
            raise ConfigurationError(
                f"adam_step: grad shape {g.shape} != param shape {p.data.shape} at index {i}"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in adam_step at step {t} (param index {i})")
        m, v = state.m[i], state.v[i]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p.data -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def zero_grads(params: list[Tensor]) -> None:
    for p in params:
        p.grad = None
