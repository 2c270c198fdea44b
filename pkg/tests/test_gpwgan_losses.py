import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import defectforge.ndgrad as ng
from defectforge.gpwgan import (
    CriticNet,
    DeltaOutOfRangeError,
    DomainError,
    GeneratorNet,
    MlpArch,
    critic_loss,
    generator_loss,
    gradient_penalty,
    interpolate,
    vanilla_gan_discriminator_loss,
    wasserstein_critic_loss,
)
from defectforge.ndgrad import ParamSet, ShapeMismatchError, Tape, grad, tensor

from oracles import finite_diff, rel_err


def linear_critic(w, b=0.0) -> CriticNet:
    """Critic D(x) = w . x + b, as a no-hidden-layer MLP."""
    w = np.asarray(w, dtype=np.float64).reshape(-1, 1)
    params = ParamSet()
    params.add("critic/w0", tensor(w))
    params.add("critic/b0", tensor(np.array([float(b)])))
    return CriticNet(MlpArch(in_dim=w.shape[0], hidden=(), out_dim=1), params)


def small_critic(rng, in_dim=3, hidden=(4,), activation="tanh") -> CriticNet:
    arch = MlpArch(in_dim=in_dim, hidden=hidden, out_dim=1, activation=activation)
    return CriticNet.initialize(arch, rng)


# ---------------------------------------------------------------------------
# interpolate


def test_interpolate_endpoints_exact():
    x = tensor([[1.0, 2.0], [3.0, 4.0]])
    x_fake = tensor([[9.0, 8.0], [7.0, 6.0]])
    np.testing.assert_array_equal(interpolate(x, x_fake, 1.0).data, x.data)
    np.testing.assert_array_equal(interpolate(x, x_fake, 0.0).data, x_fake.data)


def test_interpolate_quarter_scalar():
    assert interpolate(tensor(2.0), tensor(6.0), 0.25).item() == 5.0


def test_interpolate_per_row_delta():
    x = tensor([[2.0, 2.0], [10.0, 10.0]])
    x_fake = tensor([[6.0, 6.0], [20.0, 20.0]])
    out = interpolate(x, x_fake, np.array([0.25, 1.0]))
    np.testing.assert_array_equal(out.data, [[5.0, 5.0], [10.0, 10.0]])


def test_interpolate_errors():
    with pytest.raises(ShapeMismatchError):
        interpolate(tensor([1.0]), tensor([1.0, 2.0]), 0.5)
    with pytest.raises(DeltaOutOfRangeError):
        interpolate(tensor(1.0), tensor(2.0), 1.5)
    with pytest.raises(DeltaOutOfRangeError):
        interpolate(tensor(1.0), tensor(2.0), -0.1)


@settings(max_examples=30, deadline=None)
@given(
    rows=st.integers(1, 4),
    cols=st.integers(1, 4),
    seed=st.integers(0, 10_000),
    end=st.sampled_from([0.0, 1.0]),
)
def test_interpolate_endpoint_identity_property(rows, cols, seed, end):
    rng = np.random.default_rng(seed)
    x = tensor(rng.normal(size=(rows, cols)))
    x_fake = tensor(rng.normal(size=(rows, cols)))
    out = interpolate(x, x_fake, end)
    target = x if end == 1.0 else x_fake
    np.testing.assert_array_equal(out.data, target.data)


# ---------------------------------------------------------------------------
# gradient penalty


def test_penalty_zero_for_unit_gradient_critic():
    critic = linear_critic([0.6, 0.8])
    with Tape():
        x_hat = tensor([[0.3, -0.9]])
        pen = gradient_penalty(critic, x_hat, lam=10.0)
    assert abs(pen.item()) < 1e-9


def test_penalty_analytic_value_and_gradient():
    critic = linear_critic([3.0, 4.0])
    with Tape():
        x_hat = tensor([[0.1, 0.2]])
        pen = gradient_penalty(critic, x_hat, lam=10.0)
        assert abs(pen.item() - 160.0) < 1e-9
        gw = grad(pen, [critic.params["critic/w0"]])[0]
    # closed form: 2*lam*(||w|| - 1) * w / ||w||
    np.testing.assert_allclose(gw.data.ravel(), [48.0, 64.0], atol=1e-6)


def test_penalty_zero_iff_unit_row_norms():
    # rows of the input gradient all have norm exactly 1 -> penalty 0;
    # perturbing the weight breaks it
    critic = linear_critic([1.0, 0.0])
    with Tape():
        pen = gradient_penalty(critic, tensor([[5.0, 5.0], [1.0, -1.0]]), lam=7.0)
    assert abs(pen.item()) < 1e-9
    critic2 = linear_critic([1.1, 0.0])
    with Tape():
        pen2 = gradient_penalty(critic2, tensor([[5.0, 5.0]]), lam=7.0)
    assert pen2.item() > 1e-4


def test_penalty_per_sample_norms_match_row_by_row_evaluation():
    rng = np.random.default_rng(0)
    critic = small_critic(rng, in_dim=3, hidden=(5,))
    batch = rng.normal(size=(4, 3))

    def row_norm(row: np.ndarray) -> float:
        with Tape():
            x = tensor(row[None, :])
            score = ng.tsum(critic.forward(x))
            g = grad(score, [x])[0]
        return float(np.linalg.norm(g.data))

    expected = np.mean([(row_norm(r) - 1.0) ** 2 for r in batch])
    with Tape():
        pen = gradient_penalty(critic, tensor(batch), lam=1.0)
    assert abs(pen.item() - expected) < 1e-10


# ---------------------------------------------------------------------------
# critic loss


def test_critic_loss_hand_case_157():
    critic = linear_critic([3.0, 4.0])
    with Tape():
        x_real = tensor([[1.0, 0.5]])  # D = 5
        x_fake = tensor([[0.0, 0.5]])  # D = 2
        x_hat = tensor([[0.2, 0.2]])  # any point: gradient is w everywhere
        cl = critic_loss(critic, x_real, x_fake, x_hat, lam=10.0)
    assert cl.loss.item() == pytest.approx(157.0, abs=1e-9)
    assert cl.penalty == pytest.approx(160.0, abs=1e-9)
    assert cl.w_estimate == pytest.approx(3.0, abs=1e-12)


def test_critic_loss_symmetric_cancellation():
    critic = linear_critic([2.0, -1.0])
    with Tape():
        same = tensor([[0.4, 0.1], [1.0, 1.0]])
        cl = critic_loss(critic, same, same, tensor([[0.0, 0.0]]), lam=0.0)
    assert cl.loss.item() == 0.0
    assert cl.w_estimate == 0.0


def test_w_estimate_invariant_to_critic_constant_shift():
    rng = np.random.default_rng(1)
    x_real = rng.normal(size=(5, 3))
    x_fake = rng.normal(size=(5, 3))
    x_hat = rng.normal(size=(5, 3))
    base = small_critic(np.random.default_rng(2))
    shifted = CriticNet(base.arch, base.params.copy())
    shifted.params["critic/b1"].data += 123.456
    results = []
    for critic in (base, shifted):
        with Tape():
            cl = critic_loss(critic, tensor(x_real), tensor(x_fake), tensor(x_hat), lam=10.0)
        results.append(cl.w_estimate)
    assert results[0] == pytest.approx(results[1], abs=1e-9)


def test_critic_loss_gradient_matches_finite_differences():
    # includes the second-order path through the penalty; tanh keeps it smooth
    rng = np.random.default_rng(4)
    critic = small_critic(rng, in_dim=3, hidden=(4,), activation="tanh")
    x_real = rng.normal(size=(3, 3))
    x_fake = rng.normal(size=(3, 3))
    x_hat = rng.normal(size=(3, 3))

    arrays = [critic.params[n].data for n in critic.params.names()]

    def value() -> float:
        with Tape():
            cl = critic_loss(critic, tensor(x_real), tensor(x_fake), tensor(x_hat), lam=10.0)
        return cl.loss.item()

    fd = finite_diff(value, arrays)
    with Tape():
        cl = critic_loss(critic, tensor(x_real), tensor(x_fake), tensor(x_hat), lam=10.0)
        got = grad(cl.loss, critic.params.tensors(), record=False)
    for g, f in zip(got, fd):
        assert rel_err(g.data, f) < 1e-3


def test_wasserstein_critic_loss_is_unpenalized_difference():
    critic = linear_critic([1.0])
    loss = wasserstein_critic_loss(critic, tensor([[5.0]]), tensor([[2.0]]))
    assert loss.item() == -3.0


# ---------------------------------------------------------------------------
# generator loss


def test_generator_loss_negated_mean():
    critic = linear_critic([1.0])
    x_fake = tensor([[1.0], [3.0]])
    assert generator_loss(critic, x_fake).item() == -2.0


def test_generator_loss_constant_critic():
    critic = linear_critic([0.0, 0.0], b=4.25)
    rng = np.random.default_rng(3)
    for _ in range(3):
        x_fake = tensor(rng.normal(size=(6, 2)))
        assert generator_loss(critic, x_fake).item() == -4.25


def test_generator_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    gen = GeneratorNet.initialize(MlpArch(in_dim=2, hidden=(4,), out_dim=3, activation="tanh"), rng)
    critic = small_critic(rng, in_dim=3, hidden=(4,), activation="tanh")
    z = rng.normal(size=(5, 2))
    arrays = [gen.params[n].data for n in gen.params.names()]

    def value() -> float:
        with Tape():
            return generator_loss(critic, gen.forward(tensor(z))).item()

    fd = finite_diff(value, arrays)
    with Tape():
        loss = generator_loss(critic, gen.forward(tensor(z)))
        got = grad(loss, gen.params.tensors())
    for g, f in zip(got, fd):
        assert rel_err(g.data, f) < 1e-4


# ---------------------------------------------------------------------------
# vanilla baseline


def test_vanilla_loss_hand_values():
    loss = vanilla_gan_discriminator_loss(tensor([0.8]), tensor([0.3]))
    assert loss.item() == pytest.approx(-(math.log(0.8) + math.log(0.7)), abs=1e-12)
    half = vanilla_gan_discriminator_loss(tensor([0.5]), tensor([0.5]))
    assert half.item() == pytest.approx(2.0 * math.log(2.0), abs=1e-12)


def test_vanilla_loss_perfect_discriminator_limit():
    loss = vanilla_gan_discriminator_loss(tensor([1.0 - 1e-9]), tensor([1e-9]))
    assert 0.0 < loss.item() < 1e-8


def test_vanilla_loss_domain_errors():
    with pytest.raises(DomainError):
        vanilla_gan_discriminator_loss(tensor([1.0]), tensor([0.5]))
    with pytest.raises(DomainError):
        vanilla_gan_discriminator_loss(tensor([0.5]), tensor([0.0]))
    with pytest.raises(DomainError):
        vanilla_gan_discriminator_loss(tensor([-0.1]), tensor([0.5]))
