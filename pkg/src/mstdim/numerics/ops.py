"""Differentiable operations.

Convolution runs channels-last internally (im2col + one GEMM per layer);
the public `conv2d` keeps the channels-first calling convention and
wraps the same kernel, so both paths share one implementation and one
backward. Input gradients are only materialized when the input tensor
requires them, which lets the first encoder layer skip its (useless)
image gradient.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .tensor import Tensor, as_tensor, make_node


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# -- elementwise and structural ops ------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def bwd(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.data.shape))

    return make_node(out_data, (a, b), "add", bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def bwd(g: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.data.shape))

    return make_node(out_data, (a, b), "mul", bwd)


def scale(a: Tensor, s: float) -> Tensor:
    a = as_tensor(a)
    s = float(s)

    def bwd(g: np.ndarray) -> None:
        a.accumulate_grad(g * s)

    return make_node(a.data * s, (a,), "scale", bwd)


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0)

    def bwd(g: np.ndarray) -> None:
        a.accumulate_grad(g * (a.data > 0))

    return make_node(out_data, (a,), "relu", bwd)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.reshape(shape)

    def bwd(g: np.ndarray) -> None:
        a.accumulate_grad(g.reshape(a.data.shape))

    return make_node(out_data, (a,), "reshape", bwd)


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    inv = tuple(np.argsort(axes))

    def bwd(g: np.ndarray) -> None:
        a.accumulate_grad(g.transpose(inv))

    return make_node(a.data.transpose(axes), (a,), "transpose", bwd)


def sum_(a: Tensor, axis: int | tuple[int, ...] | None = None) -> Tensor:
    a = as_tensor(a)
    out_data = np.asarray(a.data.sum(axis=axis))

    def bwd(g: np.ndarray) -> None:
        if axis is None:
            a.accumulate_grad(np.broadcast_to(g, a.data.shape))
        else:
            a.accumulate_grad(np.broadcast_to(np.expand_dims(g, axis), a.data.shape))

    return make_node(out_data, (a,), "sum", bwd)


def mean(a: Tensor, axis: int | tuple[int, ...] | None = None) -> Tensor:
    a = as_tensor(a)
    n = a.data.size if axis is None else np.prod(
        [a.data.shape[i] for i in (axis if isinstance(axis, tuple) else (axis,))]
    )
    return scale(sum_(a, axis=axis), 1.0 / float(n))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """`a @ b` with numpy broadcasting over leading axes; operands must be >= 2-D."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ConfigurationError("matmul operands must have at least 2 dimensions")
    out_data = a.data @ b.data

    def bwd(g: np.ndarray) -> None:
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            a.accumulate_grad(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            b.accumulate_grad(_unbroadcast(gb, b.data.shape))

    return make_node(out_data, (a, b), "matmul", bwd)


# -- dense layers -------------------------------------------------------------


def linear(input: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """`output_i = sum_j weight[i, j] * input[..., j] + bias[i]`."""
    input, weight = as_tensor(input), as_tensor(weight)
    if weight.data.ndim != 2 or input.data.shape[-1] != weight.data.shape[1]:
        raise ConfigurationError(
            f"linear: input width {input.data.shape[-1:]} does not match "
            f"weight shape {weight.data.shape}"
        )
    d_out = weight.data.shape[0]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.data.shape != (d_out,):
            raise ConfigurationError(f"linear: bias shape {bias.data.shape} != ({d_out},)")
    out_data = input.data @ weight.data.T
    if bias is not None:
        out_data = out_data + bias.data

    def bwd(g: np.ndarray) -> None:
        g2 = g.reshape(-1, d_out)
        x2 = input.data.reshape(-1, input.data.shape[-1])
        if input.requires_grad:
            input.accumulate_grad((g2 @ weight.data).reshape(input.data.shape))
        if weight.requires_grad:
            weight.accumulate_grad(g2.T @ x2)
        if bias is not None and bias.requires_grad:
            bias.accumulate_grad(g2.sum(axis=0))

    parents = (input, weight) if bias is None else (input, weight, bias)
    return make_node(out_data, parents, "linear", bwd)


def bilinear_score(a: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Scalar `a^T W b` for vectors a (D_a,), b (D_b,) and W (D_a, D_b)."""
    a, w, b = as_tensor(a), as_tensor(w), as_tensor(b)
    if a.data.ndim != 1 or b.data.ndim != 1 or w.data.ndim != 2:
        raise ConfigurationError("bilinear_score expects vector, matrix, vector")
    if w.data.shape != (a.data.size, b.data.size):
        raise ConfigurationError(
            f"bilinear_score: W shape {w.data.shape} incompatible with "
            f"a ({a.data.size},) and b ({b.data.size},)"
        )
    wb = w.data @ b.data
    out_data = np.asarray(a.data @ wb, dtype=a.data.dtype)

    def bwd(g: np.ndarray) -> None:
        gs = float(g)
        if a.requires_grad:
            a.accumulate_grad(gs * wb)
        if w.requires_grad:
            w.accumulate_grad(gs * np.outer(a.data, b.data))
        if b.requires_grad:
            b.accumulate_grad(gs * (w.data.T @ a.data))

    return make_node(out_data, (a, w, b), "bilinear_score", bwd)


# -- classification loss -------------------------------------------------------


def softmax_cross_entropy(logits: Tensor, target: int | np.ndarray) -> Tensor:
    """Per-row `-logits[target] + log(sum_j exp(logits[j]))` over the last axis.

    `logits` may carry leading batch axes; `target` broadcasts against them.
    Computed with max-subtraction. Gradient is `softmax(logits) - onehot`.
    """
    logits = as_tensor(logits)
    n = logits.data.shape[-1]
    t = np.asarray(target)
    if not np.issubdtype(t.dtype, np.integer):
        raise ConfigurationError("softmax_cross_entropy target must be integer")
    if np.any(t < 0) or np.any(t >= n):
        raise ConfigurationError(f"softmax_cross_entropy target out of range [0, {n})")
    t = np.broadcast_to(t, logits.data.shape[:-1])
    m = logits.data.max(axis=-1, keepdims=True)
    z = logits.data - m
    ez = np.exp(z)
    sez = ez.sum(axis=-1)
    zt = np.take_along_axis(z, t[..., None], axis=-1)[..., 0]
    out_data = np.log(sez) - zt

    def bwd(g: np.ndarray) -> None:
        soft = ez / sez[..., None]
        onehot_idx = t[..., None]
        np.put_along_axis(
            soft, onehot_idx, np.take_along_axis(soft, onehot_idx, axis=-1) - 1.0, axis=-1
        )
        logits.accumulate_grad(soft * g[..., None])

    return make_node(out_data, (logits,), "softmax_cross_entropy", bwd)


# -- convolution ----------------------------------------------------------------


def _conv_out_size(n: int, k: int, stride: int, pad: int) -> int:
    return (n + 2 * pad - k) // stride + 1


def conv_output_shape(
    hw: tuple[int, int], kernel: int, stride: int, padding: int
) -> tuple[int, int]:
    """Spatial output extents for a square-kernel convolution."""
    h, w = hw
    if h + 2 * padding < kernel or w + 2 * padding < kernel:
        raise ConfigurationError(
            f"conv: input {h}x{w} with padding {padding} smaller than kernel {kernel}"
        )
    return _conv_out_size(h, kernel, stride, padding), _conv_out_size(w, kernel, stride, padding)


def conv2d_nhwc(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Convolution over channels-last input (B, H, W, C_in), kernel (kH, kW, C_in, C_out)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ConfigurationError("conv2d_nhwc expects 4-D input and kernel")
    bsz, h, wd, c_in = x.data.shape
    kh, kw, kc_in, c_out = w.data.shape
    if kc_in != c_in:
        raise ConfigurationError(f"conv: input channels {c_in} != kernel channels {kc_in}")
    if stride < 1 or padding < 0:
        raise ConfigurationError("conv: stride must be >= 1 and padding >= 0")
    ho, wo = conv_output_shape((h, wd), kh, stride, padding)
    if kh != kw:
        raise ConfigurationError("conv: only square kernels are supported")

    xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding), (0, 0))) if padding else x.data
    s = xp.strides
    win = np.lib.stride_tricks.as_strided(
        xp,
        (bsz, ho, wo, kh, kw, c_in),
        (s[0], s[1] * stride, s[2] * stride, s[1], s[2], s[3]),
    )
    cols = np.ascontiguousarray(win.reshape(bsz * ho * wo, kh * kw * c_in))
    wflat = w.data.reshape(kh * kw * c_in, c_out)
    out_data = (cols @ wflat).reshape(bsz, ho, wo, c_out)

    def bwd(g: np.ndarray) -> None:
        g2 = g.reshape(-1, c_out)
        if w.requires_grad:
            w.accumulate_grad((cols.T @ g2).reshape(w.data.shape))
        if x.requires_grad:
            dcols = (g2 @ wflat.T).reshape(bsz, ho, wo, kh, kw, c_in)
            dct = np.ascontiguousarray(dcols.transpose(3, 4, 0, 1, 2, 5))
            hp, wp = h + 2 * padding, wd + 2 * padding
            dxp = np.zeros((bsz, hp, wp, c_in), dtype=g.dtype)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, i : i + stride * ho : stride, j : j + stride * wo : stride, :] += dct[i, j]
            if padding:
                dxp = dxp[:, padding : hp - padding, padding : wp - padding, :]
            x.accumulate_grad(dxp)

    return make_node(out_data, (x, w), "conv2d", bwd)


def conv2d(input: Tensor, kernel: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Channels-first convolution.

    `input` is (C_in, H, W) or (B, C_in, H, W); `kernel` is
    (C_out, C_in, kH, kW). Output spatial extents follow
    `floor((n + 2*padding - k) / stride) + 1`.
    """
    input, kernel = as_tensor(input), as_tensor(kernel)
    squeeze = input.data.ndim == 3
    x = reshape(input, (1, *input.data.shape)) if squeeze else input
    if x.data.ndim != 4 or kernel.data.ndim != 4:
        raise ConfigurationError("conv2d expects (B, C, H, W) input and (O, I, kH, kW) kernel")
    x_nhwc = transpose(x, (0, 2, 3, 1))
    w_nhwc = transpose(kernel, (2, 3, 1, 0))
    y = conv2d_nhwc(x_nhwc, w_nhwc, stride=stride, padding=padding)
    y = transpose(y, (0, 3, 1, 2))
    if squeeze:
        y = reshape(y, y.data.shape[1:])
    return y
