"""Frame aesthetic scoring.

Two interchangeable backends: a popularity regressor (support-vector
regression on frame descriptors against log-normalized view counts) and a
rating-distribution model (small CNN predicting a 10-bin histogram of
ratings, trained with an earth-mover's-distance loss; the histogram mean is
the score). Both expose ``score(frame) -> AestheticScore``.
"""

import math
from dataclasses import dataclass

import cv2
import numpy as np
import torch
import torch.nn as nn
from scipy.stats import rankdata

from . import manifest as mf
from .errors import (ConstraintError, DomainError, EmptyInputError,
                     ModelLoadError, ShapeError, TrainingDivergedError)

N_RATING_BINS = 10


@dataclass(frozen=True)
class AestheticScore:
    value: float
    backend: str


# ---------------------------------------------------------------------------
# popularity backend

def popularity_label(viewcount: int, followers: int) -> float:
    """Normalized popularity score: ln((viewcount + 1) / followers)."""
    if followers < 1:
        raise DomainError("followers must be >= 1")
    if viewcount < 0:
        raise DomainError("viewcount must be >= 0")
    return math.log((viewcount + 1) / followers)


def spearman(a, b) -> float:
    """Rank correlation with average-rank ties; all-tied input gives 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("inputs must have equal length")
    if a.size < 2:
        raise ConstraintError("need at least 2 samples")
    ra, rb = rankdata(a), rankdata(b)
    va, vb = ra.var(), rb.var()
    if va == 0.0 or vb == 0.0:
        return 0.0
    cov = ((ra - ra.mean()) * (rb - rb.mean())).mean()
    return float(cov / math.sqrt(va * vb))


@dataclass
class SVRConfig:
    C: float = 10.0
    epsilon: float = 0.05
    gamma: str | float = "scale"
    seed: int = 0


class PopularityRegressor:
    """RBF support-vector regressor kept in manifest-friendly form."""

    def __init__(self, support_vectors, dual_coef, intercept, gamma, metadata=None):
        self.support_vectors = np.asarray(support_vectors, dtype=np.float64)
        self.dual_coef = np.asarray(dual_coef, dtype=np.float64).ravel()
        self.intercept = float(intercept)
        self.gamma = float(gamma)
        self.metadata = dict(metadata or {})

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d2 = (np.square(X).sum(1)[:, None]
              + np.square(self.support_vectors).sum(1)[None, :]
              - 2.0 * X @ self.support_vectors.T)
        k = np.exp(-self.gamma * np.maximum(d2, 0.0))
        return k @ self.dual_coef + self.intercept

    def save(self, directory, name: str = "popularity"):
        tensors = {
            "support_vectors": self.support_vectors,
            "dual_coef": self.dual_coef,
            "intercept": np.array([self.intercept]),
            "gamma": np.array([self.gamma]),
        }
        return mf.save_manifest(directory, name, tensors,
                                meta={"kind": "popularity_svr", **self.metadata})

    @classmethod
    def load(cls, directory) -> "PopularityRegressor":
        _name, tensors, meta = mf.load_manifest(directory)
        try:
            return cls(tensors["support_vectors"], tensors["dual_coef"],
                       tensors["intercept"][0], tensors["gamma"][0], metadata=meta)
        except KeyError as exc:
            raise ModelLoadError(f"regressor manifest missing tensor {exc}") from exc


def train_popularity_regressor(features, labels, config: SVRConfig = SVRConfig()) -> PopularityRegressor:
    from sklearn.svm import SVR

    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("features must be (n, d) matching labels")
    if X.shape[0] < 2:
        raise ConstraintError("need at least 2 training samples")

    svr = SVR(kernel="rbf", C=config.C, epsilon=config.epsilon, gamma=config.gamma)
    svr.fit(X, y)
    gamma = svr._gamma if hasattr(svr, "_gamma") else svr.gamma
    if isinstance(gamma, str):  # resolve 'scale'/'auto' numerically
        gamma = 1.0 / (X.shape[1] * X.var()) if gamma == "scale" else 1.0 / X.shape[1]
    metadata = {"degenerate_labels": bool(np.all(y == y[0]))}
    return PopularityRegressor(svr.support_vectors_, svr.dual_coef_,
                               svr.intercept_[0], gamma, metadata=metadata)


# ---------------------------------------------------------------------------
# rating-distribution backend

@dataclass
class RatingDistribution:
    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.p.shape != (N_RATING_BINS,):
            raise ShapeError(f"rating distribution must have {N_RATING_BINS} bins")


def _check_distribution(p: RatingDistribution) -> np.ndarray:
    arr = p.p
    if np.any(arr < -1e-12) or abs(arr.sum() - 1.0) > 1e-6:
        raise DomainError("not a normalized distribution")
    return arr


def emd_loss(p: RatingDistribution, q: RatingDistribution, r: float = 2.0) -> float:
    """((1/10) sum_k |CDF_p(k) - CDF_q(k)|^r)^(1/r) over the 10 ordered bins."""
    cp = np.cumsum(_check_distribution(p))
    cq = np.cumsum(_check_distribution(q))
    return float((np.abs(cp - cq) ** r).mean() ** (1.0 / r))


def mean_score(p: RatingDistribution) -> AestheticScore:
    arr = _check_distribution(p)
    value = float((np.arange(1, N_RATING_BINS + 1) * arr).sum())
    return AestheticScore(value=value, backend="nima")


QUALITY_INPUT_SIZE = 64


class QualityModel(nn.Module):
    """Small CNN emitting a softmax histogram over the 10 rating bins."""

    def __init__(self, channels=(8, 16, 32)):
        super().__init__()
        c1, c2, c3 = channels
        self.features = nn.Sequential(
            nn.Conv2d(3, c1, 3, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(c1, c2, 3, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(c2, c3, 3, stride=2, padding=1), nn.ReLU(),
            nn.AdaptiveAvgPool2d(1), nn.Flatten(),
        )
        self.head = nn.Linear(c3, N_RATING_BINS)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.head(self.features(x)), dim=-1)


def _frame_to_tensor(frame: np.ndarray) -> torch.Tensor:
    resized = cv2.resize(frame.astype(np.float32),
                         (QUALITY_INPUT_SIZE, QUALITY_INPUT_SIZE),
                         interpolation=cv2.INTER_AREA)
    return torch.from_numpy(np.ascontiguousarray(resized.transpose(2, 0, 1)))[None]


def predict_rating_distribution(frame: np.ndarray, model: QualityModel) -> RatingDistribution:
    with torch.no_grad():
        probs = model(_frame_to_tensor(frame))[0]
    return RatingDistribution(p=probs.numpy().astype(np.float64))


@dataclass
class QualityTrainConfig:
    lr: float = 1e-3
    steps: int = 100
    batch_size: int = 8
    seed: int = 0


def train_quality_model(images, targets, config: QualityTrainConfig = QualityTrainConfig(),
                        model: QualityModel | None = None):
    """Fit the histogram predictor by minimizing mean EMD to the targets.

    ``images`` are HxWx3 float arrays in [0,1]; ``targets`` length-10
    histograms. Returns ``(model, loss_log)`` with per-step mean EMD.
    """
    if len(images) == 0:
        raise EmptyInputError("training corpus is empty")
    if len(images) != len(targets):
        raise ShapeError("images and targets must align")

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    if model is None:
        model = QualityModel()
    batch_x = torch.cat([_frame_to_tensor(im) for im in images])
    batch_y = torch.stack([torch.as_tensor(np.asarray(t, dtype=np.float32)) for t in targets])

    opt = torch.optim.Adam(model.parameters(), lr=config.lr)
    gen = torch.Generator().manual_seed(config.seed)
    n = len(images)
    loss_log = []
    for step in range(1, config.steps + 1):
        idx = torch.randperm(n, generator=gen)[:min(config.batch_size, n)]
        pred = model(batch_x[idx])
        cdf_diff = torch.cumsum(pred, dim=1) - torch.cumsum(batch_y[idx], dim=1)
        emd = torch.sqrt(torch.clamp((cdf_diff ** 2).mean(dim=1), min=1e-12)).mean()
        if not torch.isfinite(emd):
            raise TrainingDivergedError(f"EMD loss diverged at step {step}", step=step)
        opt.zero_grad()
        emd.backward()
        opt.step()
        loss_log.append({"step": step, "emd": float(emd.detach())})
    return model, loss_log


def save_quality_model(model: QualityModel, directory, name: str = "nima"):
    return mf.save_state_dict(directory, name, model.state_dict(),
                              meta={"kind": "quality_model"})


def load_quality_model(directory) -> QualityModel:
    _name, state, _meta = mf.load_state_dict(directory)
    try:
        channels = (state["features.0.weight"].shape[0],
                    state["features.2.weight"].shape[0],
                    state["features.4.weight"].shape[0])
    except KeyError as exc:
        raise ModelLoadError(f"quality-model manifest missing tensor {exc}") from exc
    model = QualityModel(channels=channels)
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise ModelLoadError(f"quality-model weights incompatible: {exc}") from exc
    model.eval()
    return model


# ---------------------------------------------------------------------------
# backends consumed by the selector

class NimaBackend:
    name = "nima"

    def __init__(self, model: QualityModel):
        self.model = model

    def score(self, frame: np.ndarray) -> AestheticScore:
        return mean_score(predict_rating_distribution(frame, self.model))


class PopularityBackend:
    name = "popularity"

    def __init__(self, regressor: PopularityRegressor, extractor):
        self.regressor = regressor
        self.extractor = extractor

    def score(self, frame: np.ndarray) -> AestheticScore:
        desc = self.extractor.describe(frame)
        norm = np.linalg.norm(desc)
        desc = desc / max(norm, 1e-12)
        value = float(self.regressor.predict(desc[None])[0])
        return AestheticScore(value=value, backend="popularity")
