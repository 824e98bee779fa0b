"""Feature-statistic transfer: AdaIN and the whitening-coloring transform.

Both operate on vectorized feature maps (channels x positions) and are the
plug-in point between an encoder and decoder; the encoder/decoder pair
itself is outside this module.
"""

import numpy as np

from ..errors import ShapeError
from .gatys import FeatureMap

ADAIN_EPS = 1e-5
WCT_EIG_FLOOR = 1e-8


def adain(content: FeatureMap, style: FeatureMap) -> FeatureMap:
    """Shift each content channel to the style channel's mean/variance."""
    c, s = content.values, style.values
    if c.shape[0] != s.shape[0]:
        raise ShapeError(f"channel counts differ: {c.shape[0]} vs {s.shape[0]}")
    mu_c = c.mean(axis=1, keepdims=True)
    sd_c = c.std(axis=1, keepdims=True)
    mu_s = s.mean(axis=1, keepdims=True)
    sd_s = s.std(axis=1, keepdims=True)
    out = sd_s * (c - mu_c) / (sd_c + ADAIN_EPS) + mu_s
    return FeatureMap(values=out, layer_id=content.layer_id)


def _sym_power(cov: np.ndarray, exponent: float, floor: float) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    w = np.maximum(w, floor)
    return (v * (w ** exponent)) @ v.T


def wct(content: FeatureMap, style: FeatureMap) -> FeatureMap:
    """Whiten the content features, recolor with the style covariance.

    Covariances use 1/(M-1) after mean-centering; eigenvalues are floored
    at 1e-8 so rank-deficient directions stay finite instead of erroring.
    """
    c, s = content.values, style.values
    if c.shape[0] != s.shape[0]:
        raise ShapeError(f"channel counts differ: {c.shape[0]} vs {s.shape[0]}")
    if c.shape[1] < 2 or s.shape[1] < 2:
        raise ShapeError("WCT needs at least 2 positions per map")

    mu_c = c.mean(axis=1, keepdims=True)
    xc = c - mu_c
    cov_c = xc @ xc.T / (c.shape[1] - 1)

    mu_s = s.mean(axis=1, keepdims=True)
    xs = s - mu_s
    cov_s = xs @ xs.T / (s.shape[1] - 1)

    whitened = _sym_power(cov_c, -0.5, WCT_EIG_FLOOR) @ xc
    colored = _sym_power(cov_s, 0.5, 0.0) @ whitened
    return FeatureMap(values=colored + mu_s, layer_id=content.layer_id)
