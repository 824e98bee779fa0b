"""Video acquisition and fixed-rate frame sampling.

Videos are decoded with OpenCV; frames come out as float32 RGB in [0, 1].
Sampling picks, for each target time on the 0, 1/fps, 2/fps, ... grid, the
nearest decoded frame at-or-before that time.
"""

import math
import shutil
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import DecodeError, EmptyInputError, FetchError, OversizeError

DEFAULT_SAMPLE_FPS = 2.0
DEFAULT_FETCH_CAP_BYTES = 512 * 1024 * 1024
_TIME_EPS = 1e-6


@dataclass(frozen=True)
class VideoSource:
    """A decodable local video file plus its container metadata."""

    uri: str
    duration_s: float
    native_fps: float
    frame_count: int


@dataclass
class FrameSequence:
    """Frames sampled at a fixed rate, with their source timestamps."""

    frames: list = field(repr=False)
    timestamps_s: list
    sample_fps: float

    def __len__(self):
        return len(self.frames)

    def __post_init__(self):
        if len(self.frames) != len(self.timestamps_s):
            raise ValueError("frames and timestamps length mismatch")


def open_video(path) -> VideoSource:
    """Probe a local video file and return its source descriptor."""
    path = str(path)
    cap = cv2.VideoCapture(path)
    try:
        if not cap.isOpened():
            raise DecodeError(f"cannot decode video: {path}")
        fps = cap.get(cv2.CAP_PROP_FPS)
        count = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        if fps <= 0 or count <= 0:
            raise EmptyInputError(f"video reports no playable frames: {path}")
        duration = count / fps
    finally:
        cap.release()
    return VideoSource(uri=path, duration_s=duration, native_fps=fps, frame_count=count)


def sample_frames(source: VideoSource, sample_fps: float = DEFAULT_SAMPLE_FPS) -> FrameSequence:
    """Decode ``source`` and keep frames on the 0, 1/fps, ... time grid.

    Target times run strictly below the duration; each target maps to the
    nearest decoded frame at-or-before it. Decoding is sequential, so two
    calls on the same file yield bit-identical frames.
    """
    if sample_fps <= 0:
        raise ValueError("sample_fps must be positive")
    if source.duration_s <= 0:
        raise EmptyInputError(f"zero-duration source: {source.uri}")

    n_targets = math.ceil(source.duration_s * sample_fps - _TIME_EPS)
    n_targets = max(n_targets, 1)
    targets = [i / sample_fps for i in range(n_targets)]
    # nearest decoded frame at-or-before each target time
    wanted = [min(int(t * source.native_fps + _TIME_EPS), source.frame_count - 1)
              for t in targets]

    cap = cv2.VideoCapture(source.uri)
    if not cap.isOpened():
        raise DecodeError(f"cannot decode video: {source.uri}")
    frames = []
    timestamps = []
    try:
        want_iter = iter(zip(wanted, targets))
        want_idx, want_t = next(want_iter)
        idx = 0
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            while idx == want_idx:
                rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
                frames.append(rgb.astype(np.float32) / 255.0)
                timestamps.append(want_t)
                try:
                    want_idx, want_t = next(want_iter)
                except StopIteration:
                    want_idx = None
                    break
            if want_idx is None:
                break
            idx += 1
    finally:
        cap.release()

    if not frames:
        raise DecodeError(f"decoder produced no frames: {source.uri}")
    return FrameSequence(frames=frames, timestamps_s=timestamps, sample_fps=sample_fps)


def _default_downloader(url: str, dest: Path, byte_cap: int) -> None:
    """Stream an HTTP(S) url to ``dest``, enforcing the size cap."""
    req = urllib.request.Request(url, headers={"User-Agent": "comixify/0.1"})
    try:
        with urllib.request.urlopen(req, timeout=60) as resp, open(dest, "wb") as out:
            length = resp.headers.get("Content-Length")
            if length is not None and int(length) > byte_cap:
                raise OversizeError(f"remote file is {length} bytes, cap is {byte_cap}")
            written = 0
            while True:
                chunk = resp.read(1 << 16)
                if not chunk:
                    break
                written += len(chunk)
                if written > byte_cap:
                    raise OversizeError(f"download exceeded cap of {byte_cap} bytes")
                out.write(chunk)
    except OversizeError:
        raise
    except Exception as exc:
        raise FetchError(f"download failed for {url}: {exc}") from exc


def fetch_remote(url: str, workdir, byte_cap: int = DEFAULT_FETCH_CAP_BYTES,
                 downloader=None) -> VideoSource:
    """Download a remote video into ``workdir`` and probe it.

    ``downloader`` is a pluggable ``(url, dest_path, byte_cap) -> None``
    callable; the default handles plain HTTP(S) file urls.
    """
    parsed = urllib.parse.urlparse(url)
    if parsed.scheme not in ("http", "https", "file"):
        raise FetchError(f"unsupported url scheme: {url!r}")
    if parsed.scheme != "file" and not parsed.netloc:
        raise FetchError(f"malformed url: {url!r}")

    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    name = Path(parsed.path).name or "download"
    if not Path(name).suffix:
        name += ".mp4"
    dest = workdir / name

    if parsed.scheme == "file":
        src = Path(urllib.request.url2pathname(parsed.path))
        if not src.is_file():
            raise FetchError(f"no such file: {url}")
        if src.stat().st_size > byte_cap:
            raise OversizeError(f"file is {src.stat().st_size} bytes, cap is {byte_cap}")
        shutil.copyfile(src, dest)
    else:
        (downloader or _default_downloader)(url, dest, byte_cap)

    try:
        return open_video(dest)
    except (DecodeError, EmptyInputError):
        raise
