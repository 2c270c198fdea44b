"""Bias-corrected Adam updates over named parameter sets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ParamSet
from .tensor import NdgradError, Tensor


class NameMismatchError(NdgradError):
    """Parameter, gradient, and state names or shapes disagree."""


@dataclass
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def init(cls, params: ParamSet) -> "AdamState":
        return cls(
            t=0,
            m={name: np.zeros_like(t.data) for name, t in params.items()},
            v={name: np.zeros_like(t.data) for name, t in params.items()},
        )

    def copy(self) -> "AdamState":
        return AdamState(
            t=self.t,
            m={k: v.copy() for k, v in self.m.items()},
            v={k: v.copy() for k, v in self.v.items()},
        )


def _grad_array(g) -> np.ndarray:
    return g.data if isinstance(g, Tensor) else np.asarray(g, dtype=np.float64)


def adam_step(
    params: ParamSet,
    grads,
    state: AdamState,
    alpha: float,
    beta1: float,
    beta2: float,
    eps: float = 1e-8,
) -> tuple[ParamSet, AdamState]:
    """Apply one Adam update in place and return the mutated pair.

    `grads` maps each parameter name to a Tensor or ndarray of the same
    shape; a ParamSet works too.
    """
    grad_map = dict(grads.items())
    if set(grad_map) != set(params.names()) or set(state.m) != set(params.names()):
        raise NameMismatchError("params, grads, and state must share the same names")
    state.t += 1
    t = state.t
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, p in params.items():
        g = _grad_array(grad_map[name])
        if g.shape != p.data.shape:
            raise NameMismatchError(f"gradient shape {g.shape} != param shape {p.data.shape} for {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        p.data -= alpha * m_hat / (np.sqrt(v_hat) + eps)
    return params, state
