"""Minimal differentiable-array engine with double-backprop support."""

from .adam import AdamState, NameMismatchError, adam_step
from .params import ContainerFormatError, ParamSet
from .tensor import (
    NdgradError,
    NonFiniteResultError,
    NotOnTapeError,
    NotScalarOutputError,
    ShapeMismatchError,
    Node,
    Tape,
    Tensor,
    active_tape,
    add,
    affine,
    div,
    exp,
    expand_cols,
    expand_rows,
    grad,
    l2norm,
    leaky_relu,
    log,
    matmul,
    mean,
    mul,
    paused,
    reshape,
    scale,
    spread,
    sqrt,
    square,
    sub,
    tanh,
    tensor,
    transpose,
    tsum,
)

__all__ = [
    "AdamState",
    "ContainerFormatError",
    "NameMismatchError",
    "NdgradError",
    "Node",
    "NonFiniteResultError",
    "NotOnTapeError",
    "NotScalarOutputError",
    "ParamSet",
    "ShapeMismatchError",
    "Tape",
    "Tensor",
    "active_tape",
    "adam_step",
    "add",
    "affine",
    "div",
    "exp",
    "expand_cols",
    "expand_rows",
    "grad",
    "l2norm",
    "leaky_relu",
    "log",
    "matmul",
    "mean",
    "mul",
    "paused",
    "reshape",
    "scale",
    "spread",
    "sqrt",
    "square",
    "sub",
    "tanh",
    "tensor",
    "transpose",
    "tsum",
]
