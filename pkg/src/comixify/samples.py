"""Bundled sample videos, synthesized on first use.

Shipping binary video in the package is avoided by drawing short clips
procedurally (two visually distinct scenes each, so segmentation has
something to find) and caching the encoded file next to the models.
"""

import math
from pathlib import Path

import cv2
import numpy as np

SAMPLE_SPECS = {
    # name -> (duration_s, fps, width, height)
    "demo": (10.0, 24, 320, 240),
    "tiny": (3.0, 12, 160, 120),
}


def _draw_frame(t: float, duration: float, width: int, height: int) -> np.ndarray:
    """Render one frame: a moving disc scene, then a bouncing box scene."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float32)
    img = np.zeros((height, width, 3), dtype=np.uint8)
    half = duration / 2.0
    if t < half:
        # scene 1: warm gradient + orbiting bright disc
        img[..., 0] = (80 + 120 * xx / width).astype(np.uint8)
        img[..., 1] = (40 + 60 * yy / height).astype(np.uint8)
        img[..., 2] = 30
        phase = 2 * math.pi * t / half
        cx = int(width * (0.5 + 0.3 * math.cos(phase)))
        cy = int(height * (0.5 + 0.3 * math.sin(phase)))
        cv2.circle(img, (cx, cy), max(6, height // 8), (250, 240, 120), -1)
    else:
        # scene 2: cool gradient + bouncing rectangle
        img[..., 0] = 20
        img[..., 1] = (60 + 80 * (1 - yy / height)).astype(np.uint8)
        img[..., 2] = (100 + 120 * xx / width).astype(np.uint8)
        u = (t - half) / half
        bx = int((width - 60) * abs(math.sin(3 * math.pi * u)))
        by = int((height - 40) * abs(math.cos(2 * math.pi * u)))
        cv2.rectangle(img, (bx, by), (bx + 60, by + 40), (240, 90, 200), -1)
        cv2.rectangle(img, (bx, by), (bx + 60, by + 40), (20, 20, 20), 2)
    return img


def write_sample(name: str, path) -> Path:
    """Encode the named sample clip to ``path`` (mp4)."""
    if name not in SAMPLE_SPECS:
        raise KeyError(f"unknown sample {name!r}; have {sorted(SAMPLE_SPECS)}")
    duration, fps, width, height = SAMPLE_SPECS[name]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"),
                             float(fps), (width, height))
    if not writer.isOpened():
        raise RuntimeError("mp4 encoder unavailable")
    try:
        for i in range(int(round(duration * fps))):
            frame = _draw_frame(i / fps, duration, width, height)
            writer.write(cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    finally:
        writer.release()
    return path


def ensure_sample(name: str, samples_dir) -> Path:
    """Return the path of the named sample, encoding it if not cached yet."""
    samples_dir = Path(samples_dir)
    path = samples_dir / f"{name}.mp4"
    if not path.is_file():
        write_sample(name, path)
    return path


def list_samples(samples_dir) -> list[dict]:
    """Names and durations of all bundled samples, stable order."""
    out = []
    for name in sorted(SAMPLE_SPECS):
        duration, fps, w, h = SAMPLE_SPECS[name]
        out.append({"name": name, "duration_s": duration, "fps": fps,
                    "width": w, "height": h})
    return out
