"""Keyframe selection: best segments -> per-segment peaks -> aesthetic cut.

All ties break toward the earlier frame or segment so results are exactly
reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError
from .kts import Segmentation, default_max_segments, segment
from .summarizer import HighlightScores, score_highlightness

DEFAULT_K = 8
CANDIDATES_PER_KEYFRAME = 4  # default n = 4k


@dataclass
class KeyframeSet:
    frame_indices: list
    provenance: list  # per frame: {segment_id, highlight_score, aesthetic_score}

    def __len__(self):
        return len(self.frame_indices)

    def to_json(self) -> dict:
        return {"frame_indices": [int(i) for i in self.frame_indices],
                "provenance": self.provenance}


def select_top_segments(seg: Segmentation, scores: HighlightScores, n: int) -> list:
    """The n segments with highest mean frame score, in temporal order."""
    if n > seg.m:
        raise ConstraintError(f"asked for {n} segments, only {seg.m} available")
    probs = np.asarray(scores.probs, dtype=np.float64)
    means = [float(probs[a:b].mean()) for a, b in seg.segments]
    ranked = sorted(range(seg.m), key=lambda i: (-means[i], i))[:n]
    return [seg.segments[i] for i in sorted(ranked)]


def pick_segment_peaks(segments: list, scores: HighlightScores) -> list:
    """Highest-scoring frame of each segment (earliest on ties)."""
    probs = np.asarray(scores.probs, dtype=np.float64)
    peaks = []
    for a, b in segments:
        peaks.append(a + int(np.argmax(probs[a:b])))
    return sorted(peaks)


def aesthetic_filter(frame_indices: list, aesthetic_scores: list, k: int) -> KeyframeSet:
    """Split the candidates into k contiguous groups and keep the
    aesthetically best frame of each."""
    n = len(frame_indices)
    if k < 1:
        raise ConstraintError("k must be >= 1")
    if n % k != 0:
        raise ConstraintError(f"k must divide the candidate count ({k} does not divide {n})")
    group = n // k
    kept = []
    for g in range(k):
        lo = g * group
        sub = np.asarray(aesthetic_scores[lo:lo + group], dtype=np.float64)
        j = lo + int(np.argmax(sub))
        kept.append((frame_indices[j], float(aesthetic_scores[j])))
    indices = [i for i, _ in kept]
    return KeyframeSet(frame_indices=indices,
                       provenance=[{"aesthetic_score": s} for _, s in kept])


def extract_keyframes(frames, features, policy, aesthetic_backend,
                      n: int | None = None, k: int = DEFAULT_K,
                      max_segments: int | None = None) -> KeyframeSet:
    """Full selection pipeline over a frame sequence.

    Scores highlightness, segments the video into at least n parts, keeps
    the n best segments' peak frames, then filters down to k by aesthetics.
    """
    if n is None:
        n = CANDIDATES_PER_KEYFRAME * k
    if k < 1 or n % k != 0:
        raise ConstraintError(f"k must divide n (got k={k}, n={n})")
    if n > features.T:
        raise ConstraintError(f"need n <= frame count, got n={n}, T={features.T}")

    scores = score_highlightness(features, policy)
    if max_segments is None:
        max_segments = default_max_segments(features.T, n)
    seg = segment(features, min_segments=n, max_segments=max_segments)
    top = select_top_segments(seg, scores, n)
    peaks = pick_segment_peaks(top, scores)
    aesthetic_scores = [aesthetic_backend.score(frames.frames[i]).value for i in peaks]
    chosen = aesthetic_filter(peaks, aesthetic_scores, k)

    seg_of = {}
    for sid, (a, b) in enumerate(seg.segments):
        for t in range(a, b):
            seg_of[t] = sid
    provenance = []
    for idx, extra in zip(chosen.frame_indices, chosen.provenance):
        provenance.append({
            "segment_id": seg_of[idx],
            "highlight_score": float(scores.probs[idx]),
            "aesthetic_score": extra["aesthetic_score"],
        })
    return KeyframeSet(frame_indices=chosen.frame_indices, provenance=provenance)
