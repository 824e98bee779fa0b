import numpy as np
import pytest
import torch

from comixify.errors import ConstraintError, EmptyInputError
from comixify.modelzoo import (synthetic_checker_comics, synthetic_comics,
                               synthetic_photos)
from comixify.styletransfer import (GanTrainConfig, Generator, TrainingTriplet,
                                    load_discriminator, load_generator,
                                    pretrain_discriminator, pretrain_generator,
                                    save_discriminator, save_generator, stylize,
                                    train_comixgan)
from comixify.styletransfer.networks import Discriminator, images_to_tensor

NARROW = dict(generator_channels=8, generator_res_blocks=2, discriminator_channels=8)


def narrow_config(**kw):
    merged = {**NARROW, **kw}
    return GanTrainConfig(**merged)


def noise_photos(count, size, seed):
    rng = np.random.default_rng(seed)
    return [rng.random((size, size, 3)) for _ in range(count)]


# --- networks ----------------------------------------------------------------

def test_generator_shape_contract():
    gen = Generator(base_channels=4, n_res_blocks=1)
    x = torch.randn(1, 3, 64, 64)
    with torch.no_grad():
        out = gen(x)
    assert out.shape == (1, 3, 64, 64)
    assert out.min() >= -1.0 and out.max() <= 1.0


def test_discriminator_output_in_open_unit_interval():
    disc = Discriminator(base_channels=4)
    x = torch.randn(2, 3, 32, 32)
    with torch.no_grad():
        out = disc(x)
    assert torch.all(out > 0) and torch.all(out < 1)


def test_stylize_preserves_shape():
    gen = Generator(base_channels=4, n_res_blocks=1)
    frame = np.random.default_rng(0).random((256, 256, 3))
    out = stylize(frame, gen)
    assert out.shape == (256, 256, 3)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_stylize_pads_odd_sizes():
    gen = Generator(base_channels=4, n_res_blocks=1)
    frame = np.random.default_rng(1).random((250, 250, 3))
    out = stylize(frame, gen)
    assert out.shape == (250, 250, 3)

    frame = np.random.default_rng(2).random((37, 61, 3))
    assert stylize(frame, gen).shape == (37, 61, 3)


def test_generator_manifest_round_trip(tmp_path):
    gen = Generator(base_channels=4, n_res_blocks=2)
    save_generator(gen, tmp_path / "g")
    loaded = load_generator(tmp_path / "g")
    assert loaded.base_channels == 4 and loaded.n_res_blocks == 2
    frame = np.random.default_rng(3).random((32, 32, 3))
    np.testing.assert_allclose(stylize(frame, gen), stylize(frame, loaded), atol=1e-6)


def test_discriminator_manifest_round_trip(tmp_path):
    disc = Discriminator(base_channels=4)
    save_discriminator(disc, tmp_path / "d")
    loaded = load_discriminator(tmp_path / "d")
    x = torch.randn(1, 3, 16, 16)
    with torch.no_grad():
        np.testing.assert_allclose(disc(x).numpy(), loaded(x).numpy(), atol=1e-6)


# --- generator pretraining -----------------------------------------------------

def test_pretrain_generator_halves_content_loss():
    photos = synthetic_photos(8, 64, seed=1)
    gen, log = pretrain_generator(photos, 200, narrow_config(seed=0))
    assert len(log) == 200
    assert log[-1]["content_loss"] < 0.5 * log[0]["content_loss"]


def test_pretrain_generator_zero_steps_unchanged():
    photos = synthetic_photos(2, 32, seed=2)
    gen = Generator(base_channels=4, n_res_blocks=1)
    before = {k: v.clone() for k, v in gen.state_dict().items()}
    same, log = pretrain_generator(photos, 0, narrow_config(), generator=gen)
    assert log == [] and same is gen
    for key, value in same.state_dict().items():
        assert torch.equal(value, before[key])


def test_pretrain_generator_identical_corpus_trend():
    photo = synthetic_photos(1, 32, seed=3)[0]
    _gen, log = pretrain_generator([photo] * 4, 120, narrow_config(seed=1))
    losses = [e["content_loss"] for e in log]
    # smoothed over 10-step windows the trend is downward
    windows = [np.mean(losses[i:i + 10]) for i in range(0, 120, 10)]
    assert windows[-1] < windows[0]
    assert sum(b <= a for a, b in zip(windows[:-1], windows[1:])) >= len(windows) // 2


def test_pretrain_generator_empty_corpus():
    with pytest.raises(EmptyInputError):
        pretrain_generator([], 10, narrow_config())


def test_one_image_reconstruction_close_to_identity():
    photo = synthetic_photos(1, 64, seed=3)[0]
    gen, _log = pretrain_generator([photo], 200, narrow_config(seed=0, batch_size=1))
    out = stylize(photo, gen)
    assert np.abs(out - photo).mean() < 0.1


# --- discriminator pretraining ---------------------------------------------------

def test_pretrain_discriminator_separates_toy_corpora():
    photos = noise_photos(8, 64, seed=0)
    comics = synthetic_checker_comics(8, 64, 8, seed=2)
    triplet = TrainingTriplet.build(photos, comics)
    cfg = narrow_config(lr_discriminator=1e-3, seed=0)
    disc, log = pretrain_discriminator(triplet, 200, cfg)
    assert len(log) == 200
    with torch.no_grad():
        d_comics = float(disc(images_to_tensor(comics)).mean())
        d_photos = float(disc(images_to_tensor(photos)).mean())
    assert d_comics > 0.8
    assert d_photos < 0.2


def test_pretrain_discriminator_zero_steps_unchanged():
    photos = noise_photos(2, 32, seed=1)
    comics = synthetic_comics(2, 32, seed=2)
    triplet = TrainingTriplet.build(photos, comics)
    disc = Discriminator(base_channels=4)
    before = {k: v.clone() for k, v in disc.state_dict().items()}
    same, log = pretrain_discriminator(triplet, 0, narrow_config(), discriminator=disc)
    assert log == [] and same is disc
    for key, value in same.state_dict().items():
        assert torch.equal(value, before[key])


def test_pretrain_discriminator_identical_corpora_balance():
    imgs = synthetic_checker_comics(8, 64, 8, seed=4)
    triplet = TrainingTriplet.build([im.copy() for im in imgs], imgs)
    cfg = narrow_config(lr_discriminator=1e-3, seed=0)
    disc, _log = pretrain_discriminator(triplet, 200, cfg)
    with torch.no_grad():
        d_comics = float(disc(images_to_tensor(triplet.comics_images)).mean())
        d_photos = float(disc(images_to_tensor(triplet.real_photos)).mean())
    assert abs(d_comics - 0.5) < 0.15
    assert abs(d_photos - 0.5) < 0.15


def test_triplet_validation():
    with pytest.raises(EmptyInputError):
        TrainingTriplet([], [], []).validate()
    mixed = TrainingTriplet([np.zeros((8, 8, 3))], [np.zeros((16, 16, 3))],
                            [np.zeros((16, 16, 3))])
    with pytest.raises(ConstraintError):
        mixed.validate()


# --- adversarial phase -------------------------------------------------------------

def small_triplet(seed=0, count=8, size=32):
    photos = synthetic_photos(count, size, seed=seed)
    comics = synthetic_checker_comics(count, size, 4, seed=seed + 1)
    return TrainingTriplet.build(photos, comics)


def test_train_comixgan_ratio_and_coverage():
    triplet = small_triplet()
    cfg = narrow_config(steps=60, skip_pretraining=True, seed=0)
    _gen, report = train_comixgan(triplet, cfg)
    assert report["discriminator_steps"] == 60 // 3
    assert report["expected_discriminator_steps"] == 20
    assert len(report["loss_log"]) == 60
    assert all(report["generator_grad_coverage"].values())


def test_train_comixgan_deterministic():
    triplet = small_triplet(seed=3)
    cfg = narrow_config(steps=30, skip_pretraining=True, seed=5)
    _g1, r1 = train_comixgan(triplet, cfg)
    _g2, r2 = train_comixgan(triplet, cfg)
    assert r1["loss_log"] == r2["loss_log"]


def test_train_comixgan_checkpoints(tmp_path):
    triplet = small_triplet(seed=4)
    cfg = narrow_config(steps=20, skip_pretraining=True, seed=0,
                        checkpoint_interval=10, checkpoint_dir=str(tmp_path))
    _gen, report = train_comixgan(triplet, cfg)
    assert len(report["checkpoints"]) == 2
    for ckpt in report["checkpoints"]:
        loaded = load_generator(ckpt)
        assert loaded.base_channels == 8
