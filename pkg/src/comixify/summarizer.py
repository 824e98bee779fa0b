"""Highlightness scoring with a recurrent policy trained by REINFORCE.

The policy reads the per-frame descriptors through a bidirectional GRU and
emits one selection probability per frame. Training samples Bernoulli
selection masks and rewards them for being mutually dissimilar (diversity)
while covering the whole video (representativeness); a per-video
moving-average baseline keeps the gradient estimate centered.
"""

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from . import manifest as mf
from .errors import (ConstraintError, DegenerateSelectionError, ModelLoadError,
                     ShapeError, TrainingDivergedError)
from .features import FeatureMatrix

_LOG_EPS = 1e-12


@dataclass
class HighlightScores:
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)


@dataclass
class DSNConfig:
    hidden_dim: int = 64
    lr: float = 1e-3
    epochs: int = 50
    episodes: int = 5
    baseline_decay: float = 0.9
    reg_weight: float = 0.01
    weight_decay: float = 1e-5
    seed: int = 0


class DSNPolicy(nn.Module):
    """Bidirectional GRU over frame descriptors with a sigmoid head."""

    def __init__(self, input_dim: int, hidden_dim: int = 64):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.rnn = nn.GRU(input_dim, hidden_dim, batch_first=True, bidirectional=True)
        self.head = nn.Linear(2 * hidden_dim, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (T, D) -> probabilities (T,)
        out, _ = self.rnn(x.unsqueeze(0))
        return torch.sigmoid(self.head(out.squeeze(0))).squeeze(-1)


def score_highlightness(features: FeatureMatrix, policy: DSNPolicy) -> HighlightScores:
    if features.D != policy.input_dim:
        raise ShapeError(f"features have D={features.D}, policy expects {policy.input_dim}")
    x = torch.from_numpy(np.asarray(features.data, dtype=np.float32))
    with torch.no_grad():
        probs = policy(x)
    return HighlightScores(probs=probs.numpy().astype(np.float64))


def _selected_rows(features: FeatureMatrix, selection) -> np.ndarray:
    idx = sorted(int(i) for i in selection)
    if not idx:
        raise DegenerateSelectionError("empty selection has no reward")
    if idx[0] < 0 or idx[-1] >= features.T:
        raise ConstraintError("selection index out of range")
    return np.asarray(features.data, dtype=np.float64)[idx]


def diversity_reward(features: FeatureMatrix, selection) -> float:
    """Mean cosine dissimilarity over ordered pairs of selected frames."""
    X = _selected_rows(features, selection)
    s = X.shape[0]
    if s == 1:
        return 0.0
    norms = np.linalg.norm(X, axis=1)
    sim = (X @ X.T) / np.outer(np.maximum(norms, _LOG_EPS), np.maximum(norms, _LOG_EPS))
    d = 1.0 - sim
    np.fill_diagonal(d, 0.0)
    return float(d.sum() / (s * (s - 1)))


def representativeness_reward(features: FeatureMatrix, selection) -> float:
    """exp(-mean over all frames of the distance to the nearest selected one)."""
    X_sel = _selected_rows(features, selection)
    X = np.asarray(features.data, dtype=np.float64)
    diffs = X[:, None, :] - X_sel[None, :, :]
    dmin = np.sqrt(np.square(diffs).sum(axis=2)).min(axis=1)
    return float(np.exp(-dmin.mean()))


def episode_reward(features: FeatureMatrix, selection) -> float:
    """Training reward; the empty mask earns nothing rather than erroring."""
    if len(selection) == 0:
        return 0.0
    return diversity_reward(features, selection) + representativeness_reward(features, selection)


def train_dsn(corpus: list, config: DSNConfig = DSNConfig(),
              policy: DSNPolicy | None = None):
    """REINFORCE training over a corpus of feature matrices.

    Returns ``(policy, reward_log)`` with one ``{"epoch", "mean_reward"}``
    entry per epoch. With ``episodes == 0`` the policy is returned untouched
    and the log is empty.
    """
    if not corpus:
        raise ConstraintError("training corpus is empty")
    for fm in corpus:
        if fm.T < 2:
            raise ConstraintError("every training video needs at least 2 frames")
    dims = {fm.D for fm in corpus}
    if len(dims) != 1:
        raise ShapeError(f"corpus mixes descriptor dims: {sorted(dims)}")
    input_dim = dims.pop()

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    if policy is None:
        policy = DSNPolicy(input_dim, config.hidden_dim)
    elif policy.input_dim != input_dim:
        raise ShapeError("policy input dim does not match corpus")

    reward_log: list = []
    if config.episodes <= 0 or config.epochs <= 0:
        return policy, reward_log

    gen = torch.Generator().manual_seed(config.seed)
    opt = torch.optim.Adam(policy.parameters(), lr=config.lr,
                           weight_decay=config.weight_decay)
    baselines = np.zeros(len(corpus))
    tensors = [torch.from_numpy(np.asarray(fm.data, dtype=np.float32)) for fm in corpus]

    for epoch in range(1, config.epochs + 1):
        epoch_rewards = []
        for vid, (fm, x) in enumerate(zip(corpus, tensors)):
            probs = policy(x)
            logp = torch.log(probs + _LOG_EPS)
            log1m = torch.log1p(-probs + _LOG_EPS)
            terms = []
            video_rewards = []
            for _ in range(config.episodes):
                mask = torch.bernoulli(probs.detach(), generator=gen)
                selection = mask.nonzero(as_tuple=True)[0].tolist()
                reward = episode_reward(fm, selection)
                video_rewards.append(reward)
                log_prob = (mask * logp + (1.0 - mask) * log1m).sum()
                terms.append(-(reward - baselines[vid]) * log_prob)
            loss = torch.stack(terms).mean()
            loss = loss + config.reg_weight * (probs.mean() - 0.5) ** 2
            if not torch.isfinite(loss):
                raise TrainingDivergedError(f"loss diverged at epoch {epoch}", step=epoch)
            opt.zero_grad()
            loss.backward()
            opt.step()
            baselines[vid] = (config.baseline_decay * baselines[vid]
                              + (1.0 - config.baseline_decay) * float(np.mean(video_rewards)))
            epoch_rewards.extend(video_rewards)
        reward_log.append({"epoch": epoch, "mean_reward": float(np.mean(epoch_rewards))})
    return policy, reward_log


def save_policy(policy: DSNPolicy, directory, name: str = "dsn"):
    return mf.save_state_dict(directory, name, policy.state_dict(),
                              meta={"kind": "dsn_policy"})


def load_policy(directory) -> DSNPolicy:
    _name, state, _meta = mf.load_state_dict(directory)
    try:
        w_ih = state["rnn.weight_ih_l0"]
    except KeyError as exc:
        raise ModelLoadError(f"policy manifest missing tensor {exc}") from exc
    hidden_dim = w_ih.shape[0] // 3
    policy = DSNPolicy(input_dim=w_ih.shape[1], hidden_dim=hidden_dim)
    try:
        policy.load_state_dict(state)
    except RuntimeError as exc:
        raise ModelLoadError(f"policy weights incompatible: {exc}") from exc
    policy.eval()
    return policy
