"""Generator and critic networks: seeded MLPs over the ndgrad engine."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..ndgrad import ParamSet, Tensor, affine, leaky_relu, paused, scale, tanh, tensor
from ..ndgrad.params import ContainerFormatError

MODEL_MAGIC = b"NDGM"

_HIDDEN_ACTS = ("leaky_relu", "tanh")
_OUTPUT_MAPS = ("linear", "tanh01")


@dataclass(frozen=True)
class MlpArch:
    """Layer widths and activations for a fixed-depth MLP."""

    in_dim: int
    hidden: tuple[int, ...]
    out_dim: int
    activation: str = "leaky_relu"
    output: str = "linear"

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1 or any(h < 1 for h in self.hidden):
            raise ValueError("all layer widths must be positive")
        if self.activation not in _HIDDEN_ACTS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.output not in _OUTPUT_MAPS:
            raise ValueError(f"unknown output map {self.output!r}")

    def widths(self) -> list[tuple[int, int]]:
        dims = [self.in_dim, *self.hidden, self.out_dim]
        return list(zip(dims[:-1], dims[1:]))


def init_params(arch: MlpArch, rng: np.random.Generator, prefix: str) -> ParamSet:
    """He-style uniform fan-in initialization, zero biases."""
    ps = ParamSet()
    for i, (fan_in, fan_out) in enumerate(arch.widths()):
        limit = np.sqrt(6.0 / fan_in)
        ps.add(f"{prefix}/w{i}", tensor(rng.uniform(-limit, limit, size=(fan_in, fan_out))))
        ps.add(f"{prefix}/b{i}", tensor(np.zeros(fan_out)))
    return ps


class Mlp:
    """Batch-row MLP; every row is processed independently of the others.

    That independence is what lets the losses recover per-sample input
    gradients from a single summed backward pass.
    """

    prefix = "mlp"

    def __init__(self, arch: MlpArch, params: ParamSet, meta: dict | None = None):
        self.arch = arch
        self.params = params
        self.meta = dict(meta or {})

    @classmethod
    def initialize(cls, arch: MlpArch, rng: np.random.Generator, meta: dict | None = None):
        return cls(arch, init_params(arch, rng, cls.prefix), meta)

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.shape[1] != self.arch.in_dim:
            raise ValueError(f"expected batch of shape (m, {self.arch.in_dim}), got {x.shape}")
        h = x
        n_layers = len(self.arch.widths())
        for i in range(n_layers):
            h = affine(h, self.params[f"{self.prefix}/w{i}"], self.params[f"{self.prefix}/b{i}"])
            if i < n_layers - 1:
                h = leaky_relu(h, 0.2) if self.arch.activation == "leaky_relu" else tanh(h)
        if self.arch.output == "tanh01":
            h = scale(tanh(h) + 1.0, 0.5)
        return h

    def forward_data(self, x: np.ndarray) -> np.ndarray:
        """Unrecorded forward pass on a raw batch."""
        with paused():
            return self.forward(tensor(x)).data

    def clone(self):
        return type(self)(self.arch, self.params.copy(), self.meta)


class GeneratorNet(Mlp):
    """Maps noise batches (m, z_dim) to flattened samples (m, out_dim)."""

    prefix = "gen"

    @property
    def z_dim(self) -> int:
        return self.arch.in_dim

    @property
    def patch_shape(self) -> tuple[int, int]:
        shape = self.meta.get("patch_shape")
        return tuple(shape) if shape else (1, self.arch.out_dim)

    @property
    def class_label(self) -> str:
        return self.meta.get("class_label", "")


class CriticNet(Mlp):
    """Maps sample batches (m, d) to unbounded scores (m, 1)."""

    prefix = "critic"


_KINDS = {"generator": GeneratorNet, "critic": CriticNet}


def save_model(net: Mlp, path) -> None:
    """Model file: NDGM magic, JSON architecture descriptor, NDG1 params."""
    kind = next(k for k, cls in _KINDS.items() if isinstance(net, cls))
    descriptor = {
        "kind": kind,
        "in_dim": net.arch.in_dim,
        "hidden": list(net.arch.hidden),
        "out_dim": net.arch.out_dim,
        "activation": net.arch.activation,
        "output": net.arch.output,
        "meta": net.meta,
    }
    raw = json.dumps(descriptor, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        fh.write(net.params.to_bytes())


def load_model(path) -> Mlp:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MODEL_MAGIC:
        raise ContainerFormatError("bad magic; not an NDGM model file")
    (desc_len,) = struct.unpack("<I", blob[4:8])
    descriptor = json.loads(blob[8 : 8 + desc_len].decode("utf-8"))
    params = ParamSet.from_bytes(blob[8 + desc_len :])
    arch = MlpArch(
        in_dim=descriptor["in_dim"],
        hidden=tuple(descriptor["hidden"]),
        out_dim=descriptor["out_dim"],
        activation=descriptor["activation"],
        output=descriptor["output"],
    )
    cls = _KINDS[descriptor["kind"]]
    return cls(arch, params, descriptor.get("meta"))
