"""Command-line interface: run the pipeline, train models, serve the API."""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import ingest, modelzoo, samples
from .errors import ComixifyError, PipelineStageError
from .pipeline import (AESTHETIC_BACKENDS, FRAMES_MODES, STYLES, ModelSet,
                       PipelineOptions, run_pipeline, write_pages)

EXIT_USAGE = 2
EXIT_FAILURE = 1


def _env(name: str, default: str) -> str:
    return os.environ.get(name, default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comixify",
                                     description="Turn a video into comic pages.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline on one video")
    run.add_argument("--input", required=True,
                     help="local path, http(s) url, or sample:<name>")
    run.add_argument("--out", required=True, help="directory for the output pages")
    run.add_argument("--k", type=int, default=8, help="number of keyframes")
    run.add_argument("--n", type=int, default=None,
                     help="candidate frames before the aesthetic cut (default 4k)")
    run.add_argument("--style", default="comixgan", choices=STYLES)
    run.add_argument("--aesthetic", default="nima", choices=AESTHETIC_BACKENDS)
    run.add_argument("--frames-mode", default="basic", choices=FRAMES_MODES)
    run.add_argument("--extractor", default="stub",
                     help='"stub" or a manifest directory name under the models dir')
    run.add_argument("--sample-fps", type=float, default=2.0)
    run.add_argument("--models-dir", default=_env("COMIXIFY_MODELS_DIR", "./models"))
    run.add_argument("--workdir", default=_env("COMIXIFY_WORKDIR", "./workdir"))
    run.add_argument("--seed", type=int, default=0,
                     help="seed used if missing models must be provisioned")

    train = sub.add_parser("train", help="train a model from a JSON config")
    train.add_argument("target", choices=("dsn", "comixgan", "nima", "popularity"))
    train.add_argument("--config", required=True, help="path to the JSON config")

    serve = sub.add_parser("serve", help="start the REST service")
    serve.add_argument("--port", type=int,
                       default=int(_env("COMIXIFY_PORT", "8000")))
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--models-dir", default=_env("COMIXIFY_MODELS_DIR", "./models"))
    serve.add_argument("--workdir", default=_env("COMIXIFY_WORKDIR", "./workdir"))
    serve.add_argument("--ui-dir", default=os.environ.get("COMIXIFY_UI_DIR"),
                       help="built frontend directory to serve at /")

    init = sub.add_parser("init-models", help="provision desk-scale models")
    init.add_argument("--models-dir", default=_env("COMIXIFY_MODELS_DIR", "./models"))
    init.add_argument("--seed", type=int, default=0)

    smp = sub.add_parser("samples", help="materialize the bundled sample videos")
    smp.add_argument("--dir", default="./samples")
    return parser


def _resolve_input(value: str, workdir: Path):
    if value.startswith("sample:"):
        name = value.split(":", 1)[1]
        if name not in samples.SAMPLE_SPECS:
            raise ValueError(f"unknown sample {name!r}; have {sorted(samples.SAMPLE_SPECS)}")
        return ingest.open_video(samples.ensure_sample(name, workdir / "samples"))
    if value.startswith(("http://", "https://", "file://")):
        return ingest.fetch_remote(value, workdir / "uploads")
    path = Path(value)
    if not path.is_file():
        raise ValueError(f"no such input file: {value}")
    return ingest.open_video(path)


def cmd_run(args) -> int:
    workdir = Path(args.workdir)
    options = PipelineOptions(frames_mode=args.frames_mode, aesthetic=args.aesthetic,
                              style=args.style, extractor=args.extractor,
                              k=args.k, n=args.n, sample_fps=args.sample_fps)
    try:
        options.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        source = _resolve_input(args.input, workdir)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComixifyError as exc:
        print(f"stage acquire: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    modelzoo.ensure_models(args.models_dir, seed=args.seed)
    try:
        models = ModelSet(args.models_dir, options)
        result = run_pipeline(source, options, models)
    except PipelineStageError as exc:
        print(f"stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_FAILURE
    except ComixifyError as exc:
        print(f"stage load-models: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    paths = write_pages(result, args.out)
    summary = {
        "pages": [str(p) for p in paths],
        "keyframes": result.keyframes.to_json(),
        "timings_s": {k: round(v, 4) for k, v in result.timings.items()},
        "frames": result.frame_count,
    }
    print(json.dumps(summary, indent=2))
    return 0


# ---------------------------------------------------------------------------
# training dispatch

def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    return cfg


def _require(cfg: dict, key: str, kind=None):
    if key not in cfg:
        raise ValueError(f"config missing required key {key!r}")
    if kind is not None and not isinstance(cfg[key], kind):
        raise ValueError(f"config key {key!r} must be {kind.__name__}")
    return cfg[key]


def _write_loss_log(path, entries):
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry) + "\n")


def train_dsn_from_config(cfg: dict) -> Path:
    from . import features as feats_mod, summarizer

    out = Path(_require(cfg, "out", str))
    if "corpus_dir" in cfg:
        corpus_dir = Path(cfg["corpus_dir"])
        if not corpus_dir.is_dir():
            raise ValueError(f"corpus_dir does not exist: {corpus_dir}")
        paths = sorted(corpus_dir.glob("*.f32"))
        if not paths:
            raise ValueError(f"no .f32 feature files in {corpus_dir}")
        corpus = [feats_mod.load_features(p) for p in paths]
    elif "synthetic_corpus" in cfg:
        syn = cfg["synthetic_corpus"]
        corpus = modelzoo.synthetic_feature_corpus(
            n_videos=int(syn.get("videos", 3)), frames=int(syn.get("frames", 24)),
            dim=int(syn.get("dim", 8)), seed=int(syn.get("seed", 0)))
    else:
        raise ValueError("config needs either 'corpus_dir' or 'synthetic_corpus'")

    dsn_cfg = summarizer.DSNConfig(
        hidden_dim=int(cfg.get("hidden_dim", 32)),
        lr=float(cfg.get("lr", 1e-3)),
        epochs=int(cfg.get("epochs", 20)),
        episodes=int(cfg.get("episodes", 4)),
        baseline_decay=float(cfg.get("baseline_decay", 0.9)),
        reg_weight=float(cfg.get("reg_weight", 0.01)),
        seed=int(cfg.get("seed", 0)))
    policy, log = summarizer.train_dsn(corpus, dsn_cfg)
    summarizer.save_policy(policy, out, name=cfg.get("name", "dsn"))
    _write_loss_log(cfg.get("log", out / "training_log.jsonl"), log)
    return out


def train_comixgan_from_config(cfg: dict) -> Path:
    import cv2

    from .styletransfer import (GanTrainConfig, TrainingTriplet, save_generator,
                                train_comixgan)

    out = Path(_require(cfg, "out", str))

    def load_dir(key):
        d = Path(_require(cfg, key, str))
        if not d.is_dir():
            raise ValueError(f"{key} does not exist: {d}")
        images = []
        for p in sorted(d.iterdir()):
            if p.suffix.lower() in (".png", ".jpg", ".jpeg"):
                bgr = cv2.imread(str(p))
                if bgr is None:
                    raise ValueError(f"unreadable image {p}")
                images.append(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB).astype(np.float64) / 255.0)
        if not images:
            raise ValueError(f"no images in {d}")
        return images

    if "synthetic" in cfg:
        syn = cfg["synthetic"]
        size = int(syn.get("size", 32))
        count = int(syn.get("count", 8))
        seed = int(syn.get("seed", 0))
        photos = modelzoo.synthetic_photos(count, size, seed)
        comics = modelzoo.synthetic_comics(count, size, seed + 1)
    else:
        photos = load_dir("photos_dir")
        comics = load_dir("comics_dir")
    triplet = TrainingTriplet.build(photos, comics)

    gan_cfg = GanTrainConfig(
        generator_channels=int(cfg.get("generator_channels", 8)),
        generator_res_blocks=int(cfg.get("generator_res_blocks", 2)),
        discriminator_channels=int(cfg.get("discriminator_channels", 8)),
        batch_size=int(cfg.get("batch_size", 4)),
        omega=float(cfg.get("omega", 10.0)),
        steps=int(cfg.get("steps", 60)),
        pretrain_generator_steps=int(cfg.get("pretrain_generator_steps", 40)),
        pretrain_discriminator_steps=int(cfg.get("pretrain_discriminator_steps", 40)),
        seed=int(cfg.get("seed", 0)))
    generator, report = train_comixgan(triplet, gan_cfg)
    save_generator(generator, out, name=cfg.get("name", "comixgan"))
    _write_loss_log(cfg.get("log", out / "training_log.jsonl"), report["loss_log"])
    return out


def train_nima_from_config(cfg: dict) -> Path:
    import cv2

    from . import aesthetics

    out = Path(_require(cfg, "out", str))
    if "synthetic" in cfg:
        rng = np.random.default_rng(int(cfg["synthetic"].get("seed", 0)))
        count = int(cfg["synthetic"].get("count", 24))
        images, targets = [], []
        for _ in range(count):
            level = rng.uniform(0.05, 0.95)
            images.append(np.clip(level + rng.normal(0, 0.05, (32, 32, 3)), 0, 1))
            center = 1 + round(level * 9)
            hist = np.exp(-0.5 * ((np.arange(1, 11) - center) / 1.5) ** 2)
            targets.append(hist / hist.sum())
    else:
        images_dir = Path(_require(cfg, "images_dir", str))
        labels_path = Path(_require(cfg, "labels_json", str))
        if not images_dir.is_dir():
            raise ValueError(f"images_dir does not exist: {images_dir}")
        if not labels_path.is_file():
            raise ValueError(f"labels_json does not exist: {labels_path}")
        labels = json.loads(labels_path.read_text())
        images, targets = [], []
        for fname, hist in sorted(labels.items()):
            bgr = cv2.imread(str(images_dir / fname))
            if bgr is None:
                raise ValueError(f"unreadable image {images_dir / fname}")
            images.append(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB).astype(np.float64) / 255.0)
            targets.append(np.asarray(hist, dtype=np.float64))

    qcfg = aesthetics.QualityTrainConfig(
        lr=float(cfg.get("lr", 1e-3)), steps=int(cfg.get("steps", 100)),
        batch_size=int(cfg.get("batch_size", 8)), seed=int(cfg.get("seed", 0)))
    model, log = aesthetics.train_quality_model(images, targets, qcfg)
    aesthetics.save_quality_model(model, out, name=cfg.get("name", "nima"))
    _write_loss_log(cfg.get("log", out / "training_log.jsonl"), log)
    return out


def train_popularity_from_config(cfg: dict) -> Path:
    import cv2

    from . import aesthetics
    from .features import StubExtractor

    out = Path(_require(cfg, "out", str))
    stub = StubExtractor()
    if "synthetic" in cfg:
        rng = np.random.default_rng(int(cfg["synthetic"].get("seed", 0)))
        count = int(cfg["synthetic"].get("count", 160))
        X, y = [], []
        for _ in range(count):
            level = rng.uniform(0.05, 0.95)
            img = np.clip(level + rng.normal(0, 0.08, (24, 24, 3)), 0, 1)
            desc = stub.describe(img)
            X.append(desc / max(np.linalg.norm(desc), 1e-12))
            y.append(aesthetics.popularity_label(int(np.exp(3.0 * level) * 100), 1000))
    else:
        images_dir = Path(_require(cfg, "images_dir", str))
        labels_path = Path(_require(cfg, "labels_json", str))
        if not images_dir.is_dir() or not labels_path.is_file():
            raise ValueError("images_dir and labels_json must exist")
        labels = json.loads(labels_path.read_text())
        X, y = [], []
        for fname, rec in sorted(labels.items()):
            bgr = cv2.imread(str(images_dir / fname))
            if bgr is None:
                raise ValueError(f"unreadable image {images_dir / fname}")
            img = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB).astype(np.float64) / 255.0
            desc = stub.describe(img)
            X.append(desc / max(np.linalg.norm(desc), 1e-12))
            y.append(aesthetics.popularity_label(int(rec["viewcount"]),
                                                 int(rec["followers"])))

    svr_cfg = aesthetics.SVRConfig(C=float(cfg.get("C", 10.0)),
                                   epsilon=float(cfg.get("epsilon", 0.05)))
    reg = aesthetics.train_popularity_regressor(np.stack(X), np.asarray(y), svr_cfg)
    reg.save(out, name=cfg.get("name", "popularity"))
    return out


def cmd_train(args) -> int:
    handlers = {"dsn": train_dsn_from_config, "comixgan": train_comixgan_from_config,
                "nima": train_nima_from_config, "popularity": train_popularity_from_config}
    try:
        cfg = _load_config(args.config)
        out = handlers[args.target](cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComixifyError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(json.dumps({"manifest": str(out)}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSettings, create_app

    modelzoo.ensure_models(args.models_dir)
    settings = ServiceSettings(models_dir=args.models_dir, workdir=args.workdir,
                               job_store_path=str(Path(args.workdir) / "jobs.sqlite"),
                               ui_dir=args.ui_dir)
    uvicorn.run(create_app(settings), host=args.host, port=args.port)
    return 0


def cmd_init_models(args) -> int:
    created = modelzoo.ensure_models(args.models_dir, seed=args.seed)
    print(json.dumps({"models_dir": args.models_dir, "created": created}))
    return 0


def cmd_samples(args) -> int:
    out = {}
    for entry in samples.list_samples(args.dir):
        path = samples.ensure_sample(entry["name"], args.dir)
        out[entry["name"]] = str(path)
    print(json.dumps(out, indent=2))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "train": cmd_train, "serve": cmd_serve,
                "init-models": cmd_init_models, "samples": cmd_samples}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
