"""Gradient-penalty WGAN training loop with seeded, countable samplers.

Schedule per generator step: n_critic critic updates, each on a fresh
(real, noise, delta) triple of batch size m, then one generator update on
a fresh noise batch.  The critic update treats the generated batch as a
constant, which leaves its parameter gradients unchanged.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ..ndgrad import AdamState, Tape, adam_step, grad, tensor
from ..rng import rng_for
from .losses import critic_loss, generator_loss, interpolate
from .nets import CriticNet, GeneratorNet, MlpArch


class EmptyDatasetError(ValueError):
    """Training requires at least one real sample."""


class ConfigInvalidError(ValueError):
    """A training configuration value violates its constraints."""


@dataclass
class GanConfig:
    """Hyperparameters for one training session (one defect class)."""

    lam: float = 10.0
    n_critic: int = 5
    batch_size: int = 64
    adam_alpha: float = 1e-4
    adam_beta1: float = 0.0
    adam_beta2: float = 0.9
    z_dim: int = 16
    patch_shape: tuple[int, int] = (16, 16)
    iterations: int = 1000
    seed: int = 0
    gen_hidden: tuple[int, ...] = (128, 256)
    critic_hidden: tuple[int, ...] = (256, 128)
    output_map: str = "tanh01"
    adam_eps: float = 1e-8

    def validate(self) -> None:
        if self.lam < 0:
            raise ConfigInvalidError("lambda must be >= 0")
        if self.n_critic < 1 or self.batch_size < 1:
            raise ConfigInvalidError("n_critic and batch_size must be >= 1")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigInvalidError("adam betas must lie in [0, 1)")
        if self.z_dim < 1 or self.iterations < 0:
            raise ConfigInvalidError("z_dim must be >= 1 and iterations >= 0")
        if len(self.patch_shape) != 2 or min(self.patch_shape) < 1:
            raise ConfigInvalidError("patch_shape must be two positive extents")

    @property
    def sample_dim(self) -> int:
        return int(self.patch_shape[0] * self.patch_shape[1])

    _FILE_KEYS = {
        "lambda": "lam",
        "n_critic": "n_critic",
        "batch_size": "batch_size",
        "adam_alpha": "adam_alpha",
        "adam_beta1": "adam_beta1",
        "adam_beta2": "adam_beta2",
        "z_dim": "z_dim",
        "iterations": "iterations",
        "seed": "seed",
        "gen_hidden": "gen_hidden",
        "critic_hidden": "critic_hidden",
        "output_map": "output_map",
        "adam_eps": "adam_eps",
    }

    @classmethod
    def from_file(cls, path) -> "GanConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigInvalidError("config file must hold a JSON object")
        kwargs = {}
        patch_h = raw.pop("patch_h", None)
        patch_w = raw.pop("patch_w", None)
        for key, value in raw.items():
            if key not in cls._FILE_KEYS:
                raise ConfigInvalidError(f"unknown config key {key!r}")
            name = cls._FILE_KEYS[key]
            if name in ("gen_hidden", "critic_hidden"):
                value = tuple(int(v) for v in value)
            kwargs[name] = value
        cfg = cls(**kwargs)
        if patch_h is not None or patch_w is not None:
            if patch_h is None or patch_w is None:
                raise ConfigInvalidError("patch_h and patch_w must be given together")
            cfg = replace(cfg, patch_shape=(int(patch_h), int(patch_w)))
        cfg.validate()
        return cfg

    def to_file(self, path) -> None:
        out = {key: getattr(self, name) for key, name in self._FILE_KEYS.items()}
        out["patch_h"], out["patch_w"] = int(self.patch_shape[0]), int(self.patch_shape[1])
        out["gen_hidden"] = list(self.gen_hidden)
        out["critic_hidden"] = list(self.critic_hidden)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
            fh.write("\n")


class RealSampler:
    """Uniform draws with replacement from the real patch matrix."""

    def __init__(self, data: np.ndarray, rng: np.random.Generator):
        self.data = data
        self.rng = rng
        self.calls = 0
        self.drawn = 0

    def sample(self, m: int) -> np.ndarray:
        self.calls += 1
        self.drawn += m
        idx = self.rng.integers(0, len(self.data), size=m)
        return self.data[idx]


class NoiseSampler:
    """Standard normal noise batches."""

    def __init__(self, z_dim: int, rng: np.random.Generator):
        self.z_dim = z_dim
        self.rng = rng
        self.calls = 0
        self.drawn = 0

    def sample(self, m: int) -> np.ndarray:
        self.calls += 1
        self.drawn += m
        return self.rng.standard_normal((m, self.z_dim))


class DeltaSampler:
    """One fresh U[0,1] interpolation coefficient per batch row."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.calls = 0

    def sample(self, m: int) -> np.ndarray:
        self.calls += 1
        return self.rng.uniform(0.0, 1.0, size=m)


@dataclass
class StepRecord:
    step: int
    loss_d: float
    loss_g: float
    penalty: float
    w_estimate: float


@dataclass
class LossReport:
    """One record per generator step; critic figures are from the step's
    final critic update."""

    records: list[StepRecord] = field(default_factory=list)

    HEADER = ("step", "loss_d", "loss_g", "penalty", "w_estimate")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.HEADER)
            for r in self.records:
                writer.writerow([r.step, repr(r.loss_d), repr(r.loss_g), repr(r.penalty), repr(r.w_estimate)])


@dataclass
class Samplers:
    real: RealSampler
    noise: NoiseSampler
    delta: DeltaSampler

    @classmethod
    def seeded(cls, data: np.ndarray, config: GanConfig) -> "Samplers":
        return cls(
            real=RealSampler(data, rng_for(config.seed, "gpwgan/sample/real")),
            noise=NoiseSampler(config.z_dim, rng_for(config.seed, "gpwgan/sample/noise")),
            delta=DeltaSampler(rng_for(config.seed, "gpwgan/sample/delta")),
        )


@dataclass
class TrainResult:
    generator: GeneratorNet
    critic: CriticNet
    report: LossReport


StopCallback = Callable[[int, StepRecord, GeneratorNet], bool]


def build_nets(config: GanConfig, meta: dict | None = None) -> tuple[GeneratorNet, CriticNet]:
    gen_arch = MlpArch(
        in_dim=config.z_dim,
        hidden=config.gen_hidden,
        out_dim=config.sample_dim,
        activation="leaky_relu",
        output=config.output_map,
    )
    critic_arch = MlpArch(
        in_dim=config.sample_dim,
        hidden=config.critic_hidden,
        out_dim=1,
        activation="leaky_relu",
        output="linear",
    )
    meta = dict(meta or {})
    meta.setdefault("patch_shape", list(config.patch_shape))
    gen = GeneratorNet.initialize(gen_arch, rng_for(config.seed, "gpwgan/init/generator"), meta)
    critic = CriticNet.initialize(critic_arch, rng_for(config.seed, "gpwgan/init/critic"))
    return gen, critic


def train_gpwgan(
    config: GanConfig,
    data: np.ndarray | Sequence,
    callback: StopCallback | None = None,
    samplers: Samplers | None = None,
    meta: dict | None = None,
) -> TrainResult:
    """Run the training schedule and return the trained nets plus the loss trace.

    `callback(step, record, generator)` runs after every generator step;
    returning True stops early, with `config.iterations` as the budget.
    """
    config.validate()
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(len(data), 1)
    if data.size == 0:
        raise EmptyDatasetError("real dataset is empty")
    if data.ndim != 2 or data.shape[1] != config.sample_dim:
        raise ConfigInvalidError(
            f"dataset rows have {data.shape[1:]} values; patch_shape wants {config.sample_dim}"
        )

    gen, critic = build_nets(config, meta)
    s = samplers or Samplers.seeded(data, config)
    gen_state = AdamState.init(gen.params)
    critic_state = AdamState.init(critic.params)
    report = LossReport()

    for step in range(1, config.iterations + 1):
        for _ in range(config.n_critic):
            x = s.real.sample(config.batch_size)
            z = s.noise.sample(config.batch_size)
            deltas = s.delta.sample(config.batch_size)
            fake = gen.forward_data(z)
            with Tape():
                x_t = tensor(x)
                fake_t = tensor(fake)
                x_hat = interpolate(x_t, fake_t, deltas)
                cl = critic_loss(critic, x_t, fake_t, x_hat, config.lam)
                grads = grad(cl.loss, critic.params.tensors(), record=False)
            adam_step(
                critic.params,
                dict(zip(critic.params.names(), grads)),
                critic_state,
                config.adam_alpha,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            )
        z = s.noise.sample(config.batch_size)
        with Tape():
            fake_t = gen.forward(tensor(z))
            gl = generator_loss(critic, fake_t)
            grads = grad(gl, gen.params.tensors(), record=False)
        adam_step(
            gen.params,
            dict(zip(gen.params.names(), grads)),
            gen_state,
            config.adam_alpha,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        )
        record = StepRecord(step, cl.loss.item(), gl.item(), cl.penalty, cl.w_estimate)
        report.records.append(record)
        if callback is not None and callback(step, record, gen):
            break
    return TrainResult(gen, critic, report)
