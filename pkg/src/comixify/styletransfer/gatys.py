"""Classic content/style losses on vectorized feature maps."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError


@dataclass
class FeatureMap:
    """N filters x M spatial positions of one layer's activations."""

    values: np.ndarray
    layer_id: str = ""

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))

    @property
    def n_filters(self) -> int:
        return self.values.shape[0]

    @property
    def n_positions(self) -> int:
        return self.values.shape[1]


@dataclass
class GramMatrix:
    G: np.ndarray
    source_layer: str = ""
    n_positions: int = 0  # M of the feature map the Gram came from


@dataclass
class StyleLossConfig:
    layer_weights: dict = field(default_factory=dict)  # layer_id -> omega
    content_weight: float = 1.0
    style_weight: float = 1.0


def gram_matrix(F: FeatureMap) -> GramMatrix:
    """G = F F^T: channel-by-channel inner products of the activations."""
    V = F.values
    return GramMatrix(G=V @ V.T, source_layer=F.layer_id, n_positions=F.n_positions)


def content_loss(F: FeatureMap, P: FeatureMap) -> float:
    """Half the squared error between two feature maps."""
    if F.values.shape != P.values.shape:
        raise ShapeError(f"feature shapes differ: {F.values.shape} vs {P.values.shape}")
    diff = F.values - P.values
    return float(0.5 * np.square(diff).sum())


def style_loss(grams_a: dict, grams_b: dict, cfg: StyleLossConfig) -> float:
    """Weighted per-layer Gram mismatch.

    Each layer contributes E_l = sum (G - A)^2 / (4 N^2 M^2); the total is
    half the weighted sum of the E_l.
    """
    if set(grams_a) != set(grams_b):
        raise ShapeError(f"layer sets differ: {sorted(grams_a)} vs {sorted(grams_b)}")
    total = 0.0
    for layer, ga in grams_a.items():
        gb = grams_b[layer]
        if ga.G.shape != gb.G.shape:
            raise ShapeError(f"gram shapes differ on layer {layer!r}")
        omega = cfg.layer_weights.get(layer, 0.0)
        if omega == 0.0:
            continue
        n = ga.G.shape[0]
        m = ga.n_positions
        if m <= 0:
            raise ShapeError(f"gram for layer {layer!r} lacks its position count")
        e_l = np.square(ga.G - gb.G).sum() / (4.0 * n * n * m * m)
        total += omega * e_l
    return float(0.5 * total)


def total_loss(content: float, style: float, cfg: StyleLossConfig) -> float:
    return cfg.content_weight * content + cfg.style_weight * style
