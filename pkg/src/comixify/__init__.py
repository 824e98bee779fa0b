"""comixify: extract the best keyframes from a video and render them as
comic-style pages."""

__version__ = "0.1.0"

from . import (aesthetics, composer, features, ingest, kts, selector,
               styletransfer, summarizer)
from .pipeline import ModelSet, PipelineOptions, PipelineResult, run_pipeline

__all__ = [
    "aesthetics", "composer", "features", "ingest", "kts", "selector",
    "styletransfer", "summarizer", "ModelSet", "PipelineOptions",
    "PipelineResult", "run_pipeline", "__version__",
]
