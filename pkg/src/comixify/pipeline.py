"""End-to-end orchestration: video in, comic pages out.

Stage boundaries are timed contiguously so the per-stage timings always add
up to the whole pipeline wall time.
"""

import time
from dataclasses import dataclass, field
from pathlib import Path

from . import aesthetics, composer, features, ingest, selector, summarizer
from .errors import ComixifyError, ConstraintError, PipelineStageError
from .kts import default_max_segments, segment
from .styletransfer import load_generator, stylize

FRAMES_MODES = ("basic", "basic_vtw")
AESTHETIC_BACKENDS = ("popularity", "nima")
STYLES = ("comixgan", "cartoongan_hayao", "cartoongan_hosoda")

DSN_MANIFESTS = {"basic": "dsn_basic", "basic_vtw": "dsn_basic_vtw"}
STYLE_MANIFESTS = {"comixgan": "comixgan", "cartoongan_hayao": "cartoongan_hayao",
                   "cartoongan_hosoda": "cartoongan_hosoda"}

STAGES = ("ingest", "features", "score", "segment", "select", "stylize", "compose")


@dataclass
class PipelineOptions:
    frames_mode: str = "basic"
    aesthetic: str = "nima"
    style: str = "comixgan"
    extractor: str = "stub"
    k: int = selector.DEFAULT_K
    n: int | None = None
    sample_fps: float = ingest.DEFAULT_SAMPLE_FPS
    layout: composer.Layout = field(default_factory=composer.Layout)

    def validate(self):
        if self.frames_mode not in FRAMES_MODES:
            raise ValueError(f"frames_mode must be one of {list(FRAMES_MODES)}")
        if self.aesthetic not in AESTHETIC_BACKENDS:
            raise ValueError(f"aesthetic must be one of {list(AESTHETIC_BACKENDS)}")
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {list(STYLES)}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n is not None and self.n % self.k != 0:
            raise ValueError(f"k must divide n (got k={self.k}, n={self.n})")

    def candidates_for(self, frame_count: int) -> int:
        """Effective n: the requested value, or the largest multiple of k
        that fits both the 4k default and the video length."""
        if self.n is not None:
            return self.n
        n = min(selector.CANDIDATES_PER_KEYFRAME * self.k, frame_count)
        n -= n % self.k
        return n


@dataclass
class PipelineResult:
    pages: list
    keyframes: selector.KeyframeSet
    timings: dict
    frame_count: int

    @property
    def total_seconds(self) -> float:
        return sum(self.timings.values())


class ModelSet:
    """Per-request models resolved from the manifest directory."""

    def __init__(self, models_dir, options: PipelineOptions):
        models_dir = Path(models_dir)
        self.extractor = (features.StubExtractor() if options.extractor == features.STUB_ID
                          else features.load_extractor(models_dir / options.extractor))
        self.policy = summarizer.load_policy(models_dir / DSN_MANIFESTS[options.frames_mode])
        if options.aesthetic == "nima":
            self.aesthetic_backend = aesthetics.NimaBackend(
                aesthetics.load_quality_model(models_dir / "nima"))
        else:
            self.aesthetic_backend = aesthetics.PopularityBackend(
                aesthetics.PopularityRegressor.load(models_dir / "popularity"),
                self.extractor)
        self.generator = load_generator(models_dir / STYLE_MANIFESTS[options.style])


class _StageClock:
    def __init__(self):
        self.timings = {}
        self._last = time.perf_counter()

    def mark(self, stage: str):
        now = time.perf_counter()
        self.timings[stage] = now - self._last
        self._last = now


def run_pipeline(source: ingest.VideoSource, options: PipelineOptions,
                 models: ModelSet) -> PipelineResult:
    """Run every stage on an already-acquired video source."""
    options.validate()
    clock = _StageClock()
    stage = "ingest"
    try:
        frames = ingest.sample_frames(source, options.sample_fps)
        clock.mark(stage)

        stage = "features"
        feats = features.extract_features(frames, models.extractor)
        clock.mark(stage)

        stage = "score"
        scores = summarizer.score_highlightness(feats, models.policy)
        clock.mark(stage)

        stage = "segment"
        n = options.candidates_for(feats.T)
        if n < options.k or n > feats.T:
            raise ConstraintError(
                f"video too short: {feats.T} sampled frames cannot supply "
                f"{max(n, options.k)} keyframe candidates")
        seg = segment(feats, min_segments=n,
                      max_segments=default_max_segments(feats.T, n))
        clock.mark(stage)

        stage = "select"
        top = selector.select_top_segments(seg, scores, n)
        peaks = selector.pick_segment_peaks(top, scores)
        aesthetic_scores = [models.aesthetic_backend.score(frames.frames[i]).value
                            for i in peaks]
        chosen = selector.aesthetic_filter(peaks, aesthetic_scores, options.k)
        seg_of = {}
        for sid, (a, b) in enumerate(seg.segments):
            for t in range(a, b):
                seg_of[t] = sid
        keyframes = selector.KeyframeSet(
            frame_indices=chosen.frame_indices,
            provenance=[{"segment_id": seg_of[i],
                         "highlight_score": float(scores.probs[i]),
                         "aesthetic_score": p["aesthetic_score"]}
                        for i, p in zip(chosen.frame_indices, chosen.provenance)])
        clock.mark(stage)

        stage = "stylize"
        panels = [stylize(frames.frames[i], models.generator)
                  for i in keyframes.frame_indices]
        clock.mark(stage)

        stage = "compose"
        pages = composer.compose(panels, options.layout)
        clock.mark(stage)
    except PipelineStageError:
        raise
    except (ComixifyError, ValueError) as exc:
        raise PipelineStageError(stage, exc) from exc

    return PipelineResult(pages=pages, keyframes=keyframes,
                          timings=clock.timings, frame_count=len(frames))


def write_pages(result: PipelineResult, out_dir) -> list:
    """Save pages as page_001.png, ... under out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for page in result.pages:
        path = out_dir / f"page_{page.page_index + 1:03d}.png"
        composer.save_page_png(page, path)
        paths.append(path)
    return paths
