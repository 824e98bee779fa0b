"""Style-transfer math: classic content/style losses, feature-statistic
transforms (AdaIN, WCT), edge-aware data preparation, and the GAN
generator/discriminator with its training procedure."""

from .edge import edge_blur
from .gatys import (FeatureMap, GramMatrix, StyleLossConfig, content_loss,
                    gram_matrix, style_loss, total_loss)
from .losses import discriminator_loss, generator_loss
from .networks import (ContentFeatureNet, Discriminator, Generator,
                       load_discriminator, load_generator, make_content_net,
                       save_discriminator, save_generator)
from .stylize import stylize
from .training import (GanTrainConfig, TrainingTriplet, pretrain_discriminator,
                       pretrain_generator, train_comixgan)
from .transforms import adain, wct

__all__ = [
    "FeatureMap", "GramMatrix", "StyleLossConfig", "gram_matrix",
    "content_loss", "style_loss", "total_loss", "adain", "wct", "edge_blur",
    "discriminator_loss", "generator_loss", "Generator", "Discriminator",
    "ContentFeatureNet", "make_content_net", "save_generator", "load_generator",
    "save_discriminator", "load_discriminator", "GanTrainConfig",
    "TrainingTriplet", "pretrain_generator", "pretrain_discriminator",
    "train_comixgan", "stylize",
]
