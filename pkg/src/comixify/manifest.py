"""Portable weight-manifest container.

A model lives in a directory holding ``manifest.json`` plus one raw
little-endian float32 binary file per tensor:

    manifest.json   {"name": ..., "tensors": [{"name", "dtype": "f32",
                     "shape", "file", "sha256"}], "meta": {...}}
    <tensor>.f32    raw float32 bytes, C order

Every trainable model in the package (feature backbones, the summarization
policy, aesthetic models, GAN generators/discriminators) round-trips through
this format, so weights can be moved between machines without pickle.
``meta`` is free-form extra configuration (e.g. hidden sizes) and may be
empty.
"""

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .errors import ModelLoadError

MANIFEST_FILE = "manifest.json"


def _tensor_filename(name: str) -> str:
    # tensor names may contain dots (torch state dicts); keep them readable
    return name.replace("/", "_") + ".f32"


def save_manifest(directory, name: str, tensors: dict, meta: dict | None = None) -> Path:
    """Write ``tensors`` (mapping name -> array-like) as a weight manifest.

    Arrays are cast to float32. Returns the manifest directory path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for tname in sorted(tensors):
        arr = np.ascontiguousarray(np.asarray(tensors[tname], dtype=np.float32))
        fname = _tensor_filename(tname)
        raw = arr.tobytes()
        (directory / fname).write_bytes(raw)
        entries.append({
            "name": tname,
            "dtype": "f32",
            "shape": list(arr.shape),
            "file": fname,
            "sha256": hashlib.sha256(raw).hexdigest(),
        })
    doc = {"name": name, "tensors": entries, "meta": dict(meta or {})}
    tmp = directory / (MANIFEST_FILE + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True))
    os.replace(tmp, directory / MANIFEST_FILE)
    return directory


def load_manifest(directory) -> tuple[str, dict, dict]:
    """Load a manifest directory.

    Returns ``(name, tensors, meta)`` where tensors maps name -> float32
    ndarray. Raises ModelLoadError on missing files or checksum mismatch.
    """
    directory = Path(directory)
    path = directory / MANIFEST_FILE
    if not path.is_file():
        raise ModelLoadError(f"no {MANIFEST_FILE} in {directory}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"unreadable manifest {path}: {exc}") from exc

    tensors = {}
    for entry in doc.get("tensors", []):
        if entry.get("dtype") != "f32":
            raise ModelLoadError(f"unsupported dtype {entry.get('dtype')!r} "
                                 f"for tensor {entry.get('name')!r}")
        fpath = directory / entry["file"]
        if not fpath.is_file():
            raise ModelLoadError(f"tensor file missing: {fpath}")
        raw = fpath.read_bytes()
        digest = hashlib.sha256(raw).hexdigest()
        if digest != entry["sha256"]:
            raise ModelLoadError(f"checksum mismatch for tensor {entry['name']!r}")
        shape = tuple(entry["shape"])
        arr = np.frombuffer(raw, dtype="<f4")
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ModelLoadError(f"size mismatch for tensor {entry['name']!r}")
        tensors[entry["name"]] = arr.reshape(shape).copy()
    return doc.get("name", directory.name), tensors, doc.get("meta", {})


def manifest_exists(directory) -> bool:
    return (Path(directory) / MANIFEST_FILE).is_file()


def save_state_dict(directory, name: str, state_dict, meta: dict | None = None) -> Path:
    """Save a torch state dict (tensor values) as a manifest."""
    tensors = {k: v.detach().cpu().numpy() for k, v in state_dict.items()}
    return save_manifest(directory, name, tensors, meta)


def load_state_dict(directory) -> tuple[str, dict, dict]:
    """Load a manifest back into a dict of torch tensors."""
    import torch

    name, tensors, meta = load_manifest(directory)
    state = {k: torch.from_numpy(v) for k, v in tensors.items()}
    return name, state, meta
