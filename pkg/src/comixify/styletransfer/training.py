"""GAN training: both initialization phases and the adversarial loop.

Order of business mirrors the deployment recipe: the generator first learns
to reconstruct photos (content term only), the discriminator learns to tell
comics from photos and edge-blurred comics, then the adversarial phase
alternates three generator updates per discriminator update.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..errors import ConstraintError, EmptyInputError, TrainingDivergedError
from .edge import edge_blur
from .networks import (DISCRIMINATOR_BASE_CHANNELS, GENERATOR_BASE_CHANNELS,
                       GENERATOR_RES_BLOCKS, Discriminator, Generator,
                       images_to_tensor, make_content_net, save_generator)

_CLAMP = 1e-7  # keeps -log terms finite while sigmoid saturates


@dataclass
class TrainingTriplet:
    real_photos: list
    comics_images: list
    edge_blurred_comics: list

    @classmethod
    def build(cls, real_photos, comics_images) -> "TrainingTriplet":
        """Derive the edge-blurred negatives from the comics corpus."""
        return cls(real_photos=list(real_photos), comics_images=list(comics_images),
                   edge_blurred_comics=[edge_blur(im) for im in comics_images])

    def validate(self):
        if not (self.real_photos and self.comics_images and self.edge_blurred_comics):
            raise EmptyInputError("all three corpora must be nonempty")
        shapes = {np.asarray(im).shape
                  for corpus in (self.real_photos, self.comics_images, self.edge_blurred_comics)
                  for im in corpus}
        if len(shapes) != 1:
            raise ConstraintError(f"corpora mix resolutions: {sorted(shapes)}")


@dataclass
class GanTrainConfig:
    generator_channels: int = GENERATOR_BASE_CHANNELS
    generator_res_blocks: int = GENERATOR_RES_BLOCKS
    discriminator_channels: int = DISCRIMINATOR_BASE_CHANNELS
    lr_generator: float = 2e-4
    lr_discriminator: float = 1e-4
    batch_size: int = 4
    omega: float = 10.0
    generator_steps_per_discriminator: int = 3
    steps: int = 300
    pretrain_generator_steps: int = 200
    pretrain_discriminator_steps: int = 200
    skip_pretraining: bool = False
    checkpoint_interval: int = 0
    checkpoint_dir: str | None = None
    content_net_seed: int = 0
    seed: int = 0
    extra: dict = field(default_factory=dict)


class _BatchSampler:
    """Deterministic batches: reshuffle with a seeded generator each pass."""

    def __init__(self, tensor: torch.Tensor, batch_size: int, gen: torch.Generator):
        self.tensor = tensor
        self.batch_size = min(batch_size, tensor.shape[0])
        self.gen = gen
        self.order = []

    def next(self) -> torch.Tensor:
        if len(self.order) < self.batch_size:
            self.order = torch.randperm(self.tensor.shape[0], generator=self.gen).tolist()
        idx = [self.order.pop() for _ in range(self.batch_size)]
        return self.tensor[idx]


def _check_finite(value: torch.Tensor, what: str, step: int):
    if not torch.isfinite(value):
        raise TrainingDivergedError(f"{what} diverged at step {step}", step=step)


def pretrain_generator(photos, steps: int, config: GanTrainConfig = GanTrainConfig(),
                       generator: Generator | None = None, content_net=None):
    """Reconstruction-only phase: minimize the L1 feature distance between
    each photo and its generated version. Returns (generator, loss_log)."""
    if not photos:
        raise EmptyInputError("photo corpus is empty")
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    if generator is None:
        generator = Generator(config.generator_channels, config.generator_res_blocks)
    if content_net is None:
        content_net = make_content_net(config.content_net_seed)
    loss_log: list = []
    if steps <= 0:
        return generator, loss_log

    data = images_to_tensor(photos)
    gen_rng = torch.Generator().manual_seed(config.seed)
    sampler = _BatchSampler(data, config.batch_size, gen_rng)
    opt = torch.optim.Adam(generator.parameters(), lr=config.lr_generator)
    generator.train()
    for step in range(1, steps + 1):
        batch = sampler.next()
        out = generator(batch)
        loss = (content_net(batch) - content_net(out)).abs().mean()
        _check_finite(loss, "reconstruction loss", step)
        opt.zero_grad()
        loss.backward()
        opt.step()
        loss_log.append({"step": step, "content_loss": float(loss.detach())})
    generator.eval()
    return generator, loss_log


def pretrain_discriminator(triplet: TrainingTriplet, steps: int,
                           config: GanTrainConfig = GanTrainConfig(),
                           discriminator: Discriminator | None = None):
    """Teach the discriminator to pass comics and reject photos and
    edge-blurred comics, before any generator is involved."""
    triplet.validate()
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    if discriminator is None:
        discriminator = Discriminator(config.discriminator_channels)
    loss_log: list = []
    if steps <= 0:
        return discriminator, loss_log

    gen_rng = torch.Generator().manual_seed(config.seed)
    comics = _BatchSampler(images_to_tensor(triplet.comics_images), config.batch_size, gen_rng)
    photos = _BatchSampler(images_to_tensor(triplet.real_photos), config.batch_size, gen_rng)
    edges = _BatchSampler(images_to_tensor(triplet.edge_blurred_comics), config.batch_size, gen_rng)
    opt = torch.optim.Adam(discriminator.parameters(), lr=config.lr_discriminator)
    discriminator.train()
    for step in range(1, steps + 1):
        d_pos = discriminator(comics.next()).clamp(_CLAMP, 1 - _CLAMP)
        d_photo = discriminator(photos.next()).clamp(_CLAMP, 1 - _CLAMP)
        d_edge = discriminator(edges.next()).clamp(_CLAMP, 1 - _CLAMP)
        loss = (-torch.log(d_pos).mean()
                - torch.log(1 - d_photo).mean()
                - torch.log(1 - d_edge).mean())
        _check_finite(loss, "discriminator loss", step)
        opt.zero_grad()
        loss.backward()
        opt.step()
        loss_log.append({"step": step, "d_loss": float(loss.detach())})
    discriminator.eval()
    return discriminator, loss_log


def train_comixgan(triplet: TrainingTriplet, config: GanTrainConfig = GanTrainConfig(),
                   generator: Generator | None = None,
                   discriminator: Discriminator | None = None,
                   content_net=None):
    """Adversarial phase. Runs both initialization phases first unless nets
    are passed in or ``skip_pretraining`` is set.

    Returns ``(generator, report)`` where the report carries the per-step
    loss log, the discriminator step count, gradient coverage over the
    generator's tensors, and any checkpoints written.
    """
    triplet.validate()
    if content_net is None:
        content_net = make_content_net(config.content_net_seed)

    if generator is None:
        if config.skip_pretraining:
            torch.manual_seed(config.seed)
            generator = Generator(config.generator_channels, config.generator_res_blocks)
        else:
            generator, _ = pretrain_generator(triplet.real_photos,
                                              config.pretrain_generator_steps,
                                              config, content_net=content_net)
    if discriminator is None:
        if config.skip_pretraining:
            discriminator = Discriminator(config.discriminator_channels)
        else:
            discriminator, _ = pretrain_discriminator(triplet, config.pretrain_discriminator_steps,
                                                      config)

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    gen_rng = torch.Generator().manual_seed(config.seed + 1)
    comics = _BatchSampler(images_to_tensor(triplet.comics_images), config.batch_size, gen_rng)
    photos = _BatchSampler(images_to_tensor(triplet.real_photos), config.batch_size, gen_rng)
    edges = _BatchSampler(images_to_tensor(triplet.edge_blurred_comics), config.batch_size, gen_rng)

    opt_g = torch.optim.Adam(generator.parameters(), lr=config.lr_generator)
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.lr_discriminator)
    generator.train()
    discriminator.train()

    grad_seen = {name: False for name, _ in generator.named_parameters()}
    loss_log: list = []
    checkpoints: list = []
    d_steps = 0
    ratio = config.generator_steps_per_discriminator

    for step in range(1, config.steps + 1):
        photo_batch = photos.next()
        fake = generator(photo_batch)
        d_fake = discriminator(fake).clamp(_CLAMP, 1 - _CLAMP)
        adv = -torch.log(d_fake).mean()
        content = (content_net(photo_batch) - content_net(fake)).abs().mean()
        g_loss = adv + config.omega * content
        _check_finite(g_loss, "generator loss", step)
        opt_g.zero_grad()
        g_loss.backward()
        for name, p in generator.named_parameters():
            if p.grad is not None and bool(torch.any(p.grad != 0)):
                grad_seen[name] = True
        opt_g.step()

        entry = {"step": step, "g_loss": float(g_loss.detach()),
                 "g_adv": float(adv.detach()), "g_content": float(content.detach())}

        if ratio > 0 and step % ratio == 0:
            d_pos = discriminator(comics.next()).clamp(_CLAMP, 1 - _CLAMP)
            d_gen = discriminator(generator(photos.next()).detach()).clamp(_CLAMP, 1 - _CLAMP)
            d_edge = discriminator(edges.next()).clamp(_CLAMP, 1 - _CLAMP)
            d_loss = (-torch.log(d_pos).mean()
                      - torch.log(1 - d_gen).mean()
                      - torch.log(1 - d_edge).mean())
            _check_finite(d_loss, "discriminator loss", step)
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()
            d_steps += 1
            entry["d_loss"] = float(d_loss.detach())

        loss_log.append(entry)

        if (config.checkpoint_interval > 0 and config.checkpoint_dir
                and step % config.checkpoint_interval == 0):
            ckpt = Path(config.checkpoint_dir) / f"step_{step:06d}"
            save_generator(generator, ckpt, name=f"generator_step{step}")
            checkpoints.append(str(ckpt))

    generator.eval()
    discriminator.eval()
    report = {
        "loss_log": loss_log,
        "discriminator_steps": d_steps,
        "expected_discriminator_steps": math.floor(config.steps / ratio) if ratio > 0 else 0,
        "generator_grad_coverage": grad_seen,
        "checkpoints": checkpoints,
    }
    return generator, report
