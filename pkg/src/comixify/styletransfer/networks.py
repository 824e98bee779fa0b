"""Generator, discriminator and the content-feature network.

The generator is the classic photo-cartoonization shape: a 7x7 head, two
stride-2 down blocks, a stack of instance-normalized residual blocks, two
mirrored up blocks and a tanh output on [-1, 1] images. The discriminator
is deliberately shallow with per-patch sigmoid outputs. Widths are
configurable so desk-scale training stays fast; defaults follow the full
architecture.
"""

import numpy as np
import torch
import torch.nn as nn

from .. import manifest as mf
from ..errors import ModelLoadError

GENERATOR_BASE_CHANNELS = 64
GENERATOR_RES_BLOCKS = 8
DISCRIMINATOR_BASE_CHANNELS = 32


class ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.norm1 = nn.InstanceNorm2d(channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.norm2 = nn.InstanceNorm2d(channels)

    def forward(self, x):
        h = torch.relu(self.norm1(self.conv1(x)))
        return x + self.norm2(self.conv2(h))


class Generator(nn.Module):
    def __init__(self, base_channels: int = GENERATOR_BASE_CHANNELS,
                 n_res_blocks: int = GENERATOR_RES_BLOCKS):
        super().__init__()
        c = base_channels
        self.base_channels = c
        self.n_res_blocks = n_res_blocks
        self.head = nn.Sequential(
            nn.Conv2d(3, c, 7, 1, 3), nn.InstanceNorm2d(c), nn.ReLU(),
        )
        self.down = nn.Sequential(
            nn.Conv2d(c, 2 * c, 3, 2, 1), nn.Conv2d(2 * c, 2 * c, 3, 1, 1),
            nn.InstanceNorm2d(2 * c), nn.ReLU(),
            nn.Conv2d(2 * c, 4 * c, 3, 2, 1), nn.Conv2d(4 * c, 4 * c, 3, 1, 1),
            nn.InstanceNorm2d(4 * c), nn.ReLU(),
        )
        self.blocks = nn.Sequential(*[ResidualBlock(4 * c) for _ in range(n_res_blocks)])
        self.up = nn.Sequential(
            nn.ConvTranspose2d(4 * c, 2 * c, 3, 2, 1, output_padding=1),
            nn.Conv2d(2 * c, 2 * c, 3, 1, 1), nn.InstanceNorm2d(2 * c), nn.ReLU(),
            nn.ConvTranspose2d(2 * c, c, 3, 2, 1, output_padding=1),
            nn.Conv2d(c, c, 3, 1, 1), nn.InstanceNorm2d(c), nn.ReLU(),
        )
        self.tail = nn.Conv2d(c, 3, 7, 1, 3)

    def forward(self, x):
        # x: (B, 3, H, W) in [-1, 1]; H, W must be multiples of 4
        h = self.head(x)
        h = self.down(h)
        h = self.blocks(h)
        h = self.up(h)
        return torch.tanh(self.tail(h))


class Discriminator(nn.Module):
    def __init__(self, base_channels: int = DISCRIMINATOR_BASE_CHANNELS,
                 leaky_slope: float = 0.2):
        super().__init__()
        d = base_channels
        self.base_channels = d
        self.layers = nn.Sequential(
            nn.Conv2d(3, d, 3, 1, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(d, 2 * d, 3, 2, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(2 * d, 2 * d, 3, 1, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(2 * d, 4 * d, 3, 2, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(4 * d, 4 * d, 3, 1, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(4 * d, 8 * d, 3, 1, 1), nn.LeakyReLU(leaky_slope),
            nn.Conv2d(8 * d, 1, 1, 1, 0),
        )

    def forward(self, x):
        # per-patch probabilities, strictly inside (0, 1)
        return torch.sigmoid(self.layers(x))


class ContentFeatureNet(nn.Module):
    """Fixed-weight stand-in for the pretrained perceptual network: a small
    random conv stack whose activations define the content distance."""

    def __init__(self, channels=(16, 32, 64)):
        super().__init__()
        c1, c2, c3 = channels
        self.net = nn.Sequential(
            nn.Conv2d(3, c1, 3, 1, 1), nn.ReLU(),
            nn.Conv2d(c1, c2, 3, 2, 1), nn.ReLU(),
            nn.Conv2d(c2, c3, 3, 2, 1),
        )

    def forward(self, x):
        return self.net(x)


def make_content_net(seed: int = 0, channels=(16, 32, 64)) -> ContentFeatureNet:
    torch.manual_seed(seed)
    net = ContentFeatureNet(channels)
    net.eval()
    for p in net.parameters():
        p.requires_grad_(False)
    return net


def save_generator(gen: Generator, directory, name: str = "generator",
                   extra_meta: dict | None = None):
    meta = {"kind": "generator", **(extra_meta or {})}
    return mf.save_state_dict(directory, name, gen.state_dict(), meta=meta)


def load_generator(directory) -> Generator:
    _name, state, _meta = mf.load_state_dict(directory)
    try:
        base = state["head.0.weight"].shape[0]
    except KeyError as exc:
        raise ModelLoadError(f"generator manifest missing tensor {exc}") from exc
    n_blocks = len({k.split(".")[1] for k in state if k.startswith("blocks.")})
    gen = Generator(base_channels=base, n_res_blocks=n_blocks)
    try:
        gen.load_state_dict(state)
    except RuntimeError as exc:
        raise ModelLoadError(f"generator weights incompatible: {exc}") from exc
    gen.eval()
    return gen


def save_discriminator(disc: Discriminator, directory, name: str = "discriminator"):
    return mf.save_state_dict(directory, name, disc.state_dict(),
                              meta={"kind": "discriminator"})


def load_discriminator(directory) -> Discriminator:
    _name, state, _meta = mf.load_state_dict(directory)
    try:
        base = state["layers.0.weight"].shape[0]
    except KeyError as exc:
        raise ModelLoadError(f"discriminator manifest missing tensor {exc}") from exc
    disc = Discriminator(base_channels=base)
    try:
        disc.load_state_dict(state)
    except RuntimeError as exc:
        raise ModelLoadError(f"discriminator weights incompatible: {exc}") from exc
    disc.eval()
    return disc


def images_to_tensor(images) -> torch.Tensor:
    """Stack HxWx3 [0,1] arrays into a (B,3,H,W) tensor on [-1,1]."""
    arr = np.stack([np.asarray(im, dtype=np.float32) for im in images])
    t = torch.from_numpy(np.ascontiguousarray(arr.transpose(0, 3, 1, 2)))
    return t * 2.0 - 1.0


def tensor_to_images(t: torch.Tensor) -> list:
    """Inverse of images_to_tensor, clipped back into [0,1]."""
    arr = ((t.detach().numpy() + 1.0) / 2.0).clip(0.0, 1.0)
    return [np.ascontiguousarray(a.transpose(1, 2, 0)) for a in arr]
