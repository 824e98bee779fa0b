"""Adversarial and content losses for the cartoonization GAN.

The discriminator sees three classes: real comics (positive), generated
images and edge-blurred comics (both negative). The generator uses the
non-saturating objective -log D(G(x)) plus an L1 feature-space content
term. Both functions are differentiable torch expressions; call ``.item()``
for plain numbers.
"""

import torch

from ..errors import DomainError, ShapeError


def _as_prob_tensor(x, name: str) -> torch.Tensor:
    t = torch.as_tensor(x, dtype=torch.float64) if not torch.is_tensor(x) else x
    vals = t.detach()
    if torch.any(vals < 0) or torch.any(vals > 1):
        raise DomainError(f"{name} must lie in [0, 1]")
    return t


def discriminator_loss(d_on_comics, d_on_generated, d_on_edge_blurred) -> torch.Tensor:
    """-log D(comics) - log(1 - D(generated)) - log(1 - D(edge-blurred)),
    each term averaged over its batch/patches."""
    pos = _as_prob_tensor(d_on_comics, "D(comics)")
    neg_gen = _as_prob_tensor(d_on_generated, "D(generated)")
    neg_edge = _as_prob_tensor(d_on_edge_blurred, "D(edge_blurred)")
    return (-torch.log(pos).mean()
            - torch.log(1.0 - neg_gen).mean()
            - torch.log(1.0 - neg_edge).mean())


def generator_loss(d_on_generated, feats_photo, feats_generated, omega: float) -> torch.Tensor:
    """Non-saturating adversarial term plus omega-weighted L1 feature
    distance between the photo and its stylization."""
    d_gen = _as_prob_tensor(d_on_generated, "D(generated)")
    fp = torch.as_tensor(feats_photo, dtype=torch.float64) if not torch.is_tensor(feats_photo) else feats_photo
    fg = torch.as_tensor(feats_generated, dtype=torch.float64) if not torch.is_tensor(feats_generated) else feats_generated
    if fp.shape != fg.shape:
        raise ShapeError(f"feature shapes differ: {tuple(fp.shape)} vs {tuple(fg.shape)}")
    adv = -torch.log(d_gen).mean()
    content = (fp - fg).abs().mean()
    return adv + omega * content
