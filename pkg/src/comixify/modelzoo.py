"""Desk-scale model provisioning.

Production deployments drop externally trained weight manifests into the
models directory; this module fills any gaps with small models trained on
synthetic data so a fresh install can run end to end. Everything is seeded,
so two installs produce identical manifests.
"""

import numpy as np

from pathlib import Path

from . import aesthetics, manifest as mf, summarizer
from .features import FeatureMatrix, StubExtractor
from .styletransfer import GanTrainConfig, pretrain_generator, save_generator

ALL_MODELS = ("dsn_basic", "dsn_basic_vtw", "nima", "popularity",
              "comixgan", "cartoongan_hayao", "cartoongan_hosoda")


def synthetic_feature_corpus(n_videos: int, frames: int, dim: int, seed: int) -> list:
    """Videos made of two descriptor clusters, unit-normalized rows."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_videos):
        a = rng.normal(0, 1, dim)
        b = rng.normal(0, 1, dim)
        half = frames // 2
        rows = np.stack([a + 0.1 * rng.normal(0, 1, dim) for _ in range(half)]
                        + [b + 0.1 * rng.normal(0, 1, dim) for _ in range(frames - half)])
        rows /= np.maximum(np.linalg.norm(rows, axis=1, keepdims=True), 1e-12)
        corpus.append(FeatureMatrix(data=rows, frame_index_map=list(range(frames)),
                                    extractor_id="synthetic"))
    return corpus


def synthetic_photos(count: int, size: int, seed: int) -> list:
    """Smooth random gradient images standing in for photographs."""
    rng = np.random.default_rng(seed)
    photos = []
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    for _ in range(count):
        base = rng.uniform(0.1, 0.9, size=3)
        gx = rng.uniform(-0.4, 0.4, size=3)
        gy = rng.uniform(-0.4, 0.4, size=3)
        img = np.clip(base[None, None] + xx[..., None] * gx + yy[..., None] * gy, 0, 1)
        photos.append(img)
    return photos


def synthetic_comics(count: int, size: int, seed: int) -> list:
    """Flat-color images with hard internal edges, comic-page-like."""
    rng = np.random.default_rng(seed)
    comics = []
    for _ in range(count):
        img = np.full((size, size, 3), rng.uniform(0.6, 1.0, 3))
        n_shapes = rng.integers(2, 5)
        for _ in range(n_shapes):
            color = rng.uniform(0, 1, 3)
            x0, y0 = rng.integers(0, size // 2, 2)
            w, h = rng.integers(size // 4, size // 2, 2)
            img[y0:y0 + h, x0:x0 + w] = color
        comics.append(np.clip(img, 0, 1))
    return comics


def synthetic_checker_comics(count: int, size: int, block: int, seed: int) -> list:
    """Two-tone checkerboards: flat color with edges in every local window,
    so even a patch discriminator can always see edge sharpness."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    mask = ((yy // block + xx // block) % 2).astype(bool)
    comics = []
    for _ in range(count):
        dark = rng.uniform(0.0, 0.4, 3)
        light = rng.uniform(0.6, 1.0, 3)
        comics.append(np.where(mask[..., None], dark, light))
    return comics


def _ensure_dsn(models_dir: Path, name: str, seed: int):
    corpus = synthetic_feature_corpus(n_videos=3, frames=24, dim=StubExtractor.output_dim,
                                      seed=seed)
    cfg = summarizer.DSNConfig(hidden_dim=32, epochs=8, episodes=4, seed=seed)
    policy, _log = summarizer.train_dsn(corpus, cfg)
    summarizer.save_policy(policy, models_dir / name, name=name)


def _ensure_nima(models_dir: Path, seed: int):
    rng = np.random.default_rng(seed)
    images, targets = [], []
    for _ in range(24):
        level = rng.uniform(0.05, 0.95)
        img = np.clip(level + rng.normal(0, 0.05, (32, 32, 3)), 0, 1)
        center = 1 + round(level * 9)
        hist = np.exp(-0.5 * ((np.arange(1, 11) - center) / 1.5) ** 2)
        images.append(img)
        targets.append(hist / hist.sum())
    cfg = aesthetics.QualityTrainConfig(steps=60, seed=seed)
    model, _log = aesthetics.train_quality_model(images, targets, cfg)
    aesthetics.save_quality_model(model, models_dir / "nima", name="nima")


def _ensure_popularity(models_dir: Path, seed: int):
    rng = np.random.default_rng(seed)
    stub = StubExtractor()
    X, y = [], []
    for _ in range(160):
        level = rng.uniform(0.05, 0.95)
        img = np.clip(level + rng.normal(0, 0.08, (24, 24, 3)), 0, 1)
        desc = stub.describe(img)
        desc /= max(np.linalg.norm(desc), 1e-12)
        X.append(desc)
        followers = 1000
        viewcount = int(np.exp(3.0 * level) * 100)
        y.append(aesthetics.popularity_label(viewcount, followers))
    reg = aesthetics.train_popularity_regressor(np.stack(X), np.array(y))
    reg.save(models_dir / "popularity", name="popularity")


def _ensure_style(models_dir: Path, name: str, seed: int):
    photos = synthetic_photos(count=8, size=32, seed=seed)
    cfg = GanTrainConfig(generator_channels=8, generator_res_blocks=2,
                         batch_size=4, seed=seed, content_net_seed=seed)
    gen, _log = pretrain_generator(photos, steps=40, config=cfg)
    save_generator(gen, models_dir / name, name=name,
                   extra_meta={"style": name, "desk_scale": True})


def ensure_models(models_dir, seed: int = 0, only: list | None = None) -> list:
    """Create any missing model manifests; returns the names created."""
    models_dir = Path(models_dir)
    models_dir.mkdir(parents=True, exist_ok=True)
    wanted = list(only) if only else list(ALL_MODELS)
    created = []
    for name in wanted:
        if mf.manifest_exists(models_dir / name):
            continue
        if name == "dsn_basic":
            _ensure_dsn(models_dir, name, seed)
        elif name == "dsn_basic_vtw":
            _ensure_dsn(models_dir, name, seed + 1)
        elif name == "nima":
            _ensure_nima(models_dir, seed)
        elif name == "popularity":
            _ensure_popularity(models_dir, seed)
        elif name in ("comixgan", "cartoongan_hayao", "cartoongan_hosoda"):
            style_seed = seed + {"comixgan": 10, "cartoongan_hayao": 11,
                                 "cartoongan_hosoda": 12}[name]
            _ensure_style(models_dir, name, style_seed)
        else:
            raise KeyError(f"unknown model {name!r}")
        created.append(name)
    return created
