"""Deterministic differentiable compute core: tensors, layers, Adam, checks."""

from .adam import AdamState, adam_step, zero_grads
from .checkpoint import MAGIC, load_checkpoint, save_checkpoint
from .gradcheck import grad_check
from .ops import (
    add,
    bilinear_score,
    conv2d,
    conv2d_nhwc,
    conv_output_shape,
    linear,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    scale,
    softmax_cross_entropy,
    sum_,
    transpose,
)
from .tensor import (
    Tensor,
    as_tensor,
    debug_checks_enabled,
    parameter,
    set_debug_checks,
)

__all__ = [
    "AdamState",
    "MAGIC",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "bilinear_score",
    "conv2d",
    "conv2d_nhwc",
    "conv_output_shape",
    "debug_checks_enabled",
    "grad_check",
    "linear",
    "load_checkpoint",
    "matmul",
    "mean",
    "mul",
    "neg",
    "parameter",
    "relu",
    "reshape",
    "save_checkpoint",
    "scale",
    "set_debug_checks",
    "softmax_cross_entropy",
    "sum_",
    "transpose",
    "zero_grads",
]
