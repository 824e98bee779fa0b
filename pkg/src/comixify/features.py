"""Per-frame descriptors from a pluggable backbone.

Two backends ship with the package: an analytic stub (8 numbers per frame,
no weights needed, used throughout the test suite) and a small convolutional
network loaded from a weight manifest. Descriptors are L2-normalized, which
keeps the cosine-based rewards downstream well scaled.
"""

from dataclasses import dataclass

import cv2
import numpy as np

from . import manifest as mf
from .errors import EmptyInputError, ModelLoadError
from .ingest import FrameSequence

STUB_ID = "stub"
STUB_DIM = 8
CNN_INPUT_SIZE = 224


@dataclass
class FeatureMatrix:
    """T x D descriptor matrix for one frame sequence."""

    data: np.ndarray
    frame_index_map: list
    extractor_id: str

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def D(self) -> int:
        return self.data.shape[1]


class StubExtractor:
    """Deterministic analytic descriptor: mean RGB, gray spread,
    brightness centroid and mean gradient magnitudes."""

    id = STUB_ID
    output_dim = STUB_DIM

    def describe(self, frame: np.ndarray) -> np.ndarray:
        gray = frame.mean(axis=2)
        h, w = gray.shape
        total = float(gray.sum())
        if total > 0:
            ys, xs = np.mgrid[0:h, 0:w]
            cx = float((gray * xs).sum() / total) / max(w - 1, 1)
            cy = float((gray * ys).sum() / total) / max(h - 1, 1)
        else:
            cx = cy = 0.5
        dx = np.abs(np.diff(gray, axis=1)).mean() if w > 1 else 0.0
        dy = np.abs(np.diff(gray, axis=0)).mean() if h > 1 else 0.0
        return np.array([
            frame[..., 0].mean(), frame[..., 1].mean(), frame[..., 2].mean(),
            gray.std(), cx, cy, dx, dy,
        ], dtype=np.float64)


class CnnExtractor:
    """Small convolutional backbone; weights come from a manifest.

    Frames are resized so the short side is 224, center-cropped, and pushed
    through conv/pool layers down to a pooled vector, then a linear head of
    the manifest's declared width (1024 in the reference configuration).
    """

    def __init__(self, extractor_id: str, state: dict):
        import torch
        import torch.nn as nn

        try:
            c1, c2, c3 = (state["conv1.weight"], state["conv2.weight"],
                          state["conv3.weight"])
            head_w = state["head.weight"]
        except KeyError as exc:
            raise ModelLoadError(f"extractor manifest missing tensor {exc}") from exc

        self.id = extractor_id
        self.output_dim = head_w.shape[0]
        net = nn.Sequential()
        net.add_module("conv1", nn.Conv2d(3, c1.shape[0], 7, stride=2, padding=3))
        net.add_module("relu1", nn.ReLU())
        net.add_module("pool1", nn.MaxPool2d(2))
        net.add_module("conv2", nn.Conv2d(c1.shape[0], c2.shape[0], 3, stride=2, padding=1))
        net.add_module("relu2", nn.ReLU())
        net.add_module("conv3", nn.Conv2d(c2.shape[0], c3.shape[0], 3, stride=2, padding=1))
        net.add_module("relu3", nn.ReLU())
        net.add_module("gap", nn.AdaptiveAvgPool2d(1))
        net.add_module("flatten", nn.Flatten())
        net.add_module("head", nn.Linear(c3.shape[0], self.output_dim))
        try:
            net.load_state_dict({k: torch.as_tensor(v) for k, v in state.items()})
        except RuntimeError as exc:
            raise ModelLoadError(f"extractor weights incompatible: {exc}") from exc
        net.eval()
        for p in net.parameters():
            p.requires_grad_(False)
        self._net = net
        self._torch = torch

    @staticmethod
    def preprocess(frame: np.ndarray) -> np.ndarray:
        """Resize short side to 224, center-crop 224x224."""
        h, w = frame.shape[:2]
        scale = CNN_INPUT_SIZE / min(h, w)
        nh, nw = max(int(round(h * scale)), CNN_INPUT_SIZE), max(int(round(w * scale)), CNN_INPUT_SIZE)
        resized = cv2.resize(frame, (nw, nh), interpolation=cv2.INTER_LINEAR)
        top = (nh - CNN_INPUT_SIZE) // 2
        left = (nw - CNN_INPUT_SIZE) // 2
        return resized[top:top + CNN_INPUT_SIZE, left:left + CNN_INPUT_SIZE]

    def describe(self, frame: np.ndarray) -> np.ndarray:
        torch = self._torch
        x = self.preprocess(frame.astype(np.float32))
        t = torch.from_numpy(np.ascontiguousarray(x.transpose(2, 0, 1)))[None]
        with torch.no_grad():
            out = self._net(t)[0]
        return out.numpy().astype(np.float64)


def init_cnn_extractor_manifest(directory, extractor_id: str = "googlenet-class",
                                output_dim: int = 1024, channels=(32, 64, 128),
                                seed: int = 0):
    """Create a seeded-random backbone manifest (stand-in for pretrained
    weights, which are supplied externally in production)."""
    rng = np.random.default_rng(seed)
    c1, c2, c3 = channels

    def conv(out_c, in_c, k):
        fan_in = in_c * k * k
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_c, in_c, k, k))
        return w.astype(np.float32)

    tensors = {
        "conv1.weight": conv(c1, 3, 7), "conv1.bias": np.zeros(c1, np.float32),
        "conv2.weight": conv(c2, c1, 3), "conv2.bias": np.zeros(c2, np.float32),
        "conv3.weight": conv(c3, c2, 3), "conv3.bias": np.zeros(c3, np.float32),
        "head.weight": rng.normal(0, np.sqrt(1.0 / c3), size=(output_dim, c3)).astype(np.float32),
        "head.bias": np.zeros(output_dim, np.float32),
    }
    return mf.save_manifest(directory, extractor_id, tensors,
                            meta={"kind": "feature_extractor", "output_dim": output_dim})


def load_extractor(manifest_path):
    """Build an extractor from a manifest directory, or the analytic stub
    when given the literal keyword ``"stub"``."""
    if str(manifest_path) == STUB_ID:
        return StubExtractor()
    name, state, _meta = mf.load_manifest(manifest_path)
    return CnnExtractor(name, state)


def extract_features(frames: FrameSequence, extractor) -> FeatureMatrix:
    """Describe every frame and L2-normalize the rows."""
    if len(frames) == 0:
        raise EmptyInputError("no frames to extract features from")
    rows = np.stack([extractor.describe(f) for f in frames.frames])
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    rows = rows / np.maximum(norms, 1e-12)
    return FeatureMatrix(data=rows, frame_index_map=list(range(len(frames))),
                         extractor_id=extractor.id)


def save_features(features: FeatureMatrix, path) -> None:
    """Write a feature matrix as <path> (raw f32) + <path>.json header."""
    import json
    from pathlib import Path

    path = Path(path)
    data = np.ascontiguousarray(features.data, dtype="<f4")
    path.write_bytes(data.tobytes())
    header = {"T": features.T, "D": features.D, "extractor_id": features.extractor_id}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(header))


def load_features(path) -> FeatureMatrix:
    import json
    from pathlib import Path

    path = Path(path)
    header = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    flat = np.frombuffer(path.read_bytes(), dtype="<f4")
    data = flat.reshape(header["T"], header["D"]).astype(np.float64)
    return FeatureMatrix(data=data, frame_index_map=list(range(header["T"])),
                         extractor_id=header["extractor_id"])
