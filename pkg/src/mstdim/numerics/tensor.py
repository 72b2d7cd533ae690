"""Reverse-mode autodiff over numpy arrays.

A `Tensor` wraps a numpy array plus an optional gradient buffer of the
same shape. Operations build a tape; `backward()` walks it in reverse
topological order. Training runs in float32; verification casts
parameters to float64 (see `gradcheck`).
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from ..errors import NonFiniteError

# When enabled, every op output is scanned for NaN/Inf. Off by default on
# the hot path; invariant tests switch it on.
_DEBUG_CHECKS = False


def set_debug_checks(enabled: bool) -> None:
    global _DEBUG_CHECKS
    _DEBUG_CHECKS = bool(enabled)


def debug_checks_enabled() -> bool:
    return _DEBUG_CHECKS


class Tensor:
    """Array node in the autodiff graph."""

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_bwd")

    def __init__(
        self,
        data: np.ndarray | float | Iterable,
        requires_grad: bool = False,
        op: str = "leaf",
        parents: tuple["Tensor", ...] = (),
    ):
        if not isinstance(data, np.ndarray):
            if isinstance(data, np.generic):
                data = np.asarray(data)
            else:
                data = np.asarray(data, dtype=np.float32)
        self.data = data
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = op
        self._parents = parents
        self._bwd: Callable[[np.ndarray], None] | None = None

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, op={self.op})"

    # -- graph plumbing ------------------------------------------------------

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(self.data.dtype, copy=True)
        else:
            self.grad += g

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Backpropagate from this node (scalar unless `grad` is given)."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without grad requires a scalar output")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.accumulate_grad(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._bwd is not None and node.grad is not None:
                node._bwd(node.grad)


def make_node(
    data: np.ndarray,
    parents: tuple[Tensor, ...],
    op: str,
    bwd: Callable[[np.ndarray], None],
) -> Tensor:
    """Wrap an op result; the node only requires grad if a parent does."""
    requires = any(p.requires_grad for p in parents)
    if _DEBUG_CHECKS and not np.all(np.isfinite(data)):
        raise NonFiniteError(f"non-finite values produced by op '{op}'")
    out = Tensor(data, requires_grad=requires, op=op, parents=parents if requires else ())
    if requires:
        out._bwd = bwd
    return out


def as_tensor(x: Tensor | np.ndarray | float) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data: np.ndarray, dtype: np.dtype | type = np.float32) -> Tensor:
    """Leaf tensor holding trainable weights."""
    return Tensor(np.ascontiguousarray(data, dtype=dtype), requires_grad=True, op="param")
