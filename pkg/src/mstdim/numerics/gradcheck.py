"""Analytic-vs-numeric gradient verification via central finite differences."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ConfigurationError, NonFiniteError
from ..seeding import new_rng
from .tensor import Tensor


def grad_check(
    scalar_function: Callable[[list[Tensor]], Tensor],
    params: list[Tensor],
    epsilon: float = 1e-5,
    n_samples: int = 64,
    seed: int = 0,
    atol: float = 1e-7,
) -> float:
    """Worst relative error between backprop and central differences.

    Samples at least `n_samples` coordinates across all parameters (or every
    coordinate if there are fewer). Coordinates where both gradients fall
    below `atol` count as zero error. The function must be deterministic.
    """
    if not (1e-6 <= epsilon <= 1e-3):
        raise ConfigurationError("grad_check epsilon must lie in [1e-6, 1e-3]")

    for p in params:
        p.grad = None
    out = scalar_function(params)
    if out.data.size != 1:
        raise ConfigurationError("grad_check expects a scalar-valued function")
    if not np.isfinite(out.data).all():
        raise NonFiniteError(f"grad_check: non-finite output from op '{out.op}'")
    out.backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]

    sizes = [p.data.size for p in params]
    total = int(sum(sizes))
    n = total if total <= n_samples else n_samples
    rng = new_rng("grad_check", seed)
    flat_idx = np.sort(rng.choice(total, size=n, replace=False))
    bounds = np.cumsum([0] + sizes)

    worst = 0.0
    for fi in flat_idx:
        pi = int(np.searchsorted(bounds, fi, side="right") - 1)
        ci = int(fi - bounds[pi])
        flat = params[pi].data.reshape(-1)
        orig = flat[ci]
        flat[ci] = orig + epsilon
        f_plus = float(scalar_function(params).data)
        flat[ci] = orig - epsilon
        f_minus = float(scalar_function(params).data)
        flat[ci] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteError("grad_check: non-finite value during finite differencing")
        numeric = (f_plus - f_minus) / (2.0 * epsilon)
        a = float(analytic[pi].reshape(-1)[ci])
        if abs(a) < atol and abs(numeric) < atol:
            continue
        rel = abs(a - numeric) / max(abs(a), abs(numeric))
        worst = max(worst, rel)
    return worst
