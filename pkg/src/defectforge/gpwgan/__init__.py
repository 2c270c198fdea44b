"""Gradient-penalty WGAN: losses, training schedule, and patch synthesis."""

from .losses import (
    CriticLoss,
    DeltaOutOfRangeError,
    DomainError,
    critic_loss,
    generator_loss,
    gradient_penalty,
    interpolate,
    vanilla_gan_discriminator_loss,
    wasserstein_critic_loss,
)
from .nets import CriticNet, GeneratorNet, MlpArch, load_model, save_model
from .synth import generate, synthesize_patches
from .train import (
    ConfigInvalidError,
    DeltaSampler,
    EmptyDatasetError,
    GanConfig,
    LossReport,
    NoiseSampler,
    RealSampler,
    Samplers,
    StepRecord,
    TrainResult,
    build_nets,
    train_gpwgan,
)

__all__ = [
    "ConfigInvalidError",
    "CriticLoss",
    "CriticNet",
    "DeltaOutOfRangeError",
    "DeltaSampler",
    "DomainError",
    "EmptyDatasetError",
    "GanConfig",
    "GeneratorNet",
    "LossReport",
    "MlpArch",
    "NoiseSampler",
    "RealSampler",
    "Samplers",
    "StepRecord",
    "TrainResult",
    "build_nets",
    "critic_loss",
    "generate",
    "generator_loss",
    "gradient_penalty",
    "interpolate",
    "load_model",
    "save_model",
    "synthesize_patches",
    "train_gpwgan",
    "vanilla_gan_discriminator_loss",
    "wasserstein_critic_loss",
]
