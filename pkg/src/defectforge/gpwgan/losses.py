"""Critic and generator objectives, including the gradient-penalty term.

The penalty keeps the critic's input gradient norm near 1, the soft form
of the 1-Lipschitz constraint behind the Wasserstein duality estimate.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..ndgrad import (
    Tensor,
    expand_cols,
    grad,
    l2norm,
    mean,
    mul,
    scale,
    square,
    sub,
    tensor,
    tsum,
)
from ..ndgrad.tensor import ShapeMismatchError, log
from .nets import CriticNet


class DeltaOutOfRangeError(ValueError):
    """Interpolation coefficient outside [0, 1]."""


class DomainError(ValueError):
    """Probability inputs outside the open interval (0, 1)."""


def interpolate(x: Tensor, x_fake: Tensor, delta) -> Tensor:
    """Convex combination delta*x + (1-delta)*x_fake.

    `delta` is a scalar, or one coefficient per batch row when given a
    vector matching the first extent of a rank-2 batch.
    """
    if x.shape != x_fake.shape:
        raise ShapeMismatchError(f"interpolate: shapes {x.shape} and {x_fake.shape} differ")
    arr = delta.data if isinstance(delta, Tensor) else np.asarray(delta, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DeltaOutOfRangeError("delta must lie in [0, 1]")
    if arr.ndim == 0:
        d = float(arr)
        return scale(x, d) + scale(x_fake, 1.0 - d)
    if x.data.ndim != 2 or arr.shape != (x.shape[0],):
        raise ShapeMismatchError(
            f"per-row delta needs shape ({x.shape[0]},) on a rank-2 batch, got {arr.shape}"
        )
    coeff = expand_cols(tensor(arr), x.shape[1])
    return mul(coeff, x) + mul(sub(1.0, coeff), x_fake)


def gradient_penalty(critic: CriticNet, x_hat: Tensor, lam: float) -> Tensor:
    """lam * mean over the batch of (||d critic / d x_hat||_2 - 1)^2.

    The backward pass that produces the per-sample input gradients is
    recorded, so the returned scalar can itself be differentiated with
    respect to the critic parameters.  Per-sample gradients come from one
    summed backward pass, which is exact because the critic scores each
    batch row independently.
    """
    scores = critic.forward(x_hat)
    per_sample = grad(tsum(scores), [x_hat], record=True)[0]
    norms = l2norm(per_sample, axis=1)
    return scale(mean(square(sub(norms, 1.0))), float(lam))


class CriticLoss(NamedTuple):
    loss: Tensor
    penalty: float
    w_estimate: float


def critic_loss(
    critic: CriticNet,
    x_real: Tensor,
    x_fake: Tensor,
    x_hat: Tensor,
    lam: float,
) -> CriticLoss:
    """mean D(fake) - mean D(real) + gradient penalty.

    Also reports the duality-gap estimate mean D(real) - mean D(fake),
    which is invariant to adding a constant to the critic.
    """
    if x_real.shape != x_fake.shape:
        raise ShapeMismatchError(f"batch shapes differ: {x_real.shape} vs {x_fake.shape}")
    mean_real = mean(critic.forward(x_real))
    mean_fake = mean(critic.forward(x_fake))
    penalty = gradient_penalty(critic, x_hat, lam)
    loss = sub(mean_fake, mean_real) + penalty
    return CriticLoss(loss, penalty.item(), mean_real.item() - mean_fake.item())


def wasserstein_critic_loss(critic: CriticNet, x_real: Tensor, x_fake: Tensor) -> Tensor:
    """Plain (unpenalized) critic objective, for baseline comparisons."""
    if x_real.shape != x_fake.shape:
        raise ShapeMismatchError(f"batch shapes differ: {x_real.shape} vs {x_fake.shape}")
    return sub(mean(critic.forward(x_fake)), mean(critic.forward(x_real)))


def generator_loss(critic: CriticNet, x_fake: Tensor) -> Tensor:
    """-mean D(fake): the generator climbs the critic's score."""
    return scale(mean(critic.forward(x_fake)), -1.0)


def vanilla_gan_discriminator_loss(d_real: Tensor, d_fake: Tensor) -> Tensor:
    """Baseline saturating GAN loss over post-sigmoid scores.

    -mean log d_real - mean log(1 - d_fake); both inputs must lie
    strictly inside (0, 1).
    """
    for name, t in (("d_real", d_real), ("d_fake", d_fake)):
        if np.any(t.data <= 0.0) or np.any(t.data >= 1.0):
            raise DomainError(f"{name} values must lie strictly inside (0, 1)")
    return scale(mean(log(d_real)) + mean(log(sub(1.0, d_fake))), -1.0)
