import csv

import numpy as np
import pytest

from defectforge.gpwgan import (
    ConfigInvalidError,
    EmptyDatasetError,
    GanConfig,
    GeneratorNet,
    MlpArch,
    Samplers,
    build_nets,
    load_model,
    save_model,
    synthesize_patches,
    train_gpwgan,
)
from defectforge.rng import rng_for


def tiny_config(**overrides) -> GanConfig:
    base = dict(
        lam=10.0,
        n_critic=2,
        batch_size=4,
        adam_alpha=1e-3,
        z_dim=3,
        patch_shape=(2, 2),
        iterations=3,
        seed=11,
        gen_hidden=(8,),
        critic_hidden=(8,),
        output_map="tanh01",
    )
    base.update(overrides)
    return GanConfig(**base)


def tiny_data(n=16, dim=4, seed=0) -> np.ndarray:
    return rng_for(seed, "test/data").uniform(0.2, 0.8, size=(n, dim))


def test_zero_iterations_returns_initialization():
    cfg = tiny_config(iterations=0)
    result = train_gpwgan(cfg, tiny_data())
    gen0, critic0 = build_nets(cfg)
    assert result.generator.params.allclose(gen0.params)
    assert result.critic.params.allclose(critic0.params)
    assert result.report.records == []


def test_same_seed_bit_identical_params():
    cfg = tiny_config()
    a = train_gpwgan(cfg, tiny_data())
    b = train_gpwgan(cfg, tiny_data())
    assert a.generator.params.to_bytes() == b.generator.params.to_bytes()
    assert a.critic.params.to_bytes() == b.critic.params.to_bytes()


def test_sampler_draw_counts_follow_schedule():
    cfg = tiny_config(iterations=3, n_critic=2, batch_size=4)
    data = tiny_data()
    samplers = Samplers.seeded(data, cfg)
    train_gpwgan(cfg, data, samplers=samplers)
    # per generator step: n_critic real batches and n_critic+1 noise batches
    assert samplers.real.drawn == 3 * 2 * 4
    assert samplers.noise.drawn == 3 * (2 + 1) * 4
    assert samplers.real.calls == 3 * 2
    assert samplers.noise.calls == 3 * 3
    assert samplers.delta.calls == 3 * 2


def test_report_one_record_per_step_all_finite():
    cfg = tiny_config(iterations=5)
    result = train_gpwgan(cfg, tiny_data())
    assert [r.step for r in result.report.records] == [1, 2, 3, 4, 5]
    for r in result.report.records:
        assert np.isfinite([r.loss_d, r.loss_g, r.penalty, r.w_estimate]).all()


def test_loss_csv_layout(tmp_path):
    cfg = tiny_config(iterations=2)
    result = train_gpwgan(cfg, tiny_data())
    path = tmp_path / "loss.csv"
    result.report.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "loss_d", "loss_g", "penalty", "w_estimate"]
    assert len(rows) == 3
    assert float(rows[1][1]) == result.report.records[0].loss_d


def test_callback_early_stop_respects_budget():
    cfg = tiny_config(iterations=50)
    result = train_gpwgan(cfg, tiny_data(), callback=lambda step, rec, gen: step >= 2)
    assert len(result.report.records) == 2


def test_empty_dataset_and_bad_config():
    with pytest.raises(EmptyDatasetError):
        train_gpwgan(tiny_config(), np.zeros((0, 4)))
    with pytest.raises(ConfigInvalidError):
        train_gpwgan(tiny_config(lam=-1.0), tiny_data())
    with pytest.raises(ConfigInvalidError):
        train_gpwgan(tiny_config(n_critic=0), tiny_data())
    with pytest.raises(ConfigInvalidError):
        # rows do not match patch_shape product
        train_gpwgan(tiny_config(), np.zeros((4, 7)))


def test_config_file_round_trip(tmp_path):
    cfg = tiny_config(lam=2.5, seed=99)
    path = tmp_path / "gan.json"
    cfg.to_file(path)
    back = GanConfig.from_file(path)
    assert back == cfg


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "gan.json"
    path.write_text('{"lambda": 10, "n_critik": 5}')
    with pytest.raises(ConfigInvalidError):
        GanConfig.from_file(path)


def test_model_file_round_trip(tmp_path):
    cfg = tiny_config(iterations=1)
    result = train_gpwgan(cfg, tiny_data(), meta={"class_label": "inclusion"})
    path = tmp_path / "gen.ndgm"
    save_model(result.generator, path)
    back = load_model(path)
    assert isinstance(back, GeneratorNet)
    assert back.class_label == "inclusion"
    assert back.patch_shape == (2, 2)
    assert back.params.to_bytes() == result.generator.params.to_bytes()
    z = rng_for(0, "test/z").standard_normal((3, cfg.z_dim))
    np.testing.assert_array_equal(back.forward_data(z), result.generator.forward_data(z))


def test_synthesize_patches_count_shape_determinism():
    cfg = tiny_config(iterations=0)
    gen, _ = build_nets(cfg, meta={"class_label": "spot"})
    patches = synthesize_patches(gen, count=3, seed=5)
    assert len(patches) == 3
    assert all(p.shape == (2, 2) for p in patches)
    assert all(p.class_label == "spot" for p in patches)
    assert all(p.origin == "generated" for p in patches)
    again = synthesize_patches(gen, count=3, seed=5)
    for a, b in zip(patches, again):
        assert a.pixels.tobytes() == b.pixels.tobytes()


def test_synthesize_patches_clamped_even_for_wild_generator():
    # a linear-output generator with inflated weights emits values far
    # outside [0,1]; the postprocess must clamp every pixel
    arch = MlpArch(in_dim=3, hidden=(8,), out_dim=4, output="linear")
    gen = GeneratorNet.initialize(arch, rng_for(1, "test/wild"), {"patch_shape": [2, 2]})
    for name in gen.params.names():
        gen.params[name].data *= 50.0
    raw = gen.forward_data(rng_for(2, "test/z2").standard_normal((10, 3)))
    assert raw.max() > 1.0 and raw.min() < 0.0  # genuinely adversarial
    patches = synthesize_patches(gen, count=1000, seed=3)
    lo = min(p.pixels.min() for p in patches)
    hi = max(p.pixels.max() for p in patches)
    assert 0.0 <= lo and hi <= 1.0


def test_synthesize_patches_rescale_stretches_range():
    cfg = tiny_config(iterations=0)
    gen, _ = build_nets(cfg)
    patches = synthesize_patches(gen, count=5, seed=7, rescale=True)
    for p in patches:
        assert p.pixels.min() == pytest.approx(0.0)
        assert p.pixels.max() == pytest.approx(1.0)
