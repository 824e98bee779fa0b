"""Inference with a trained generator."""

import numpy as np
import torch

from .networks import Generator


def stylize(frame: np.ndarray, generator: Generator) -> np.ndarray:
    """Run one RGB [0,1] frame through the generator, preserving its size.

    Sides that are not multiples of 4 are reflect-padded for the two
    stride-2 stages, then cropped back.
    """
    h, w = frame.shape[:2]
    pad_h = (-h) % 4
    pad_w = (-w) % 4
    x = torch.from_numpy(np.ascontiguousarray(
        frame.astype(np.float32).transpose(2, 0, 1)))[None] * 2.0 - 1.0
    if pad_h or pad_w:
        x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
    with torch.no_grad():
        out = generator(x)
    out = (out[0, :, :h, :w].numpy() + 1.0) / 2.0
    return np.ascontiguousarray(out.transpose(1, 2, 0)).clip(0.0, 1.0)
