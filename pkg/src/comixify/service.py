"""REST service around the pipeline.

Jobs run on a thread pool; records live in the embedded job store and are
readable immediately after POST returns. A synchronous flag blocks the POST
until the job reaches a terminal state, surfacing errors as HTTP statuses.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse

from . import ingest, samples
from .errors import (DecodeError, EmptyInputError, FetchError, OversizeError,
                     PipelineStageError)
from .jobstore import JobStore
from .pipeline import (AESTHETIC_BACKENDS, FRAMES_MODES, STYLES, ModelSet,
                       PipelineOptions, run_pipeline, write_pages)

DEFAULT_UPLOAD_CAP = 512 * 1024 * 1024


@dataclass
class ServiceSettings:
    models_dir: str
    workdir: str
    job_store_path: str | None = None  # None -> in-memory
    upload_cap_bytes: int = DEFAULT_UPLOAD_CAP
    max_workers: int = 2
    job_timeout_s: float = 600.0
    ui_dir: str | None = None  # built frontend to serve at /

    @classmethod
    def from_env(cls) -> "ServiceSettings":
        models = os.environ.get("COMIXIFY_MODELS_DIR", "./models")
        workdir = os.environ.get("COMIXIFY_WORKDIR", "./workdir")
        return cls(models_dir=models, workdir=workdir,
                   job_store_path=str(Path(workdir) / "jobs.sqlite"),
                   ui_dir=os.environ.get("COMIXIFY_UI_DIR"))


def _parse_options(fields: dict) -> PipelineOptions:
    def pick(name, default, allowed):
        value = fields.get(name, default)
        if value not in allowed:
            raise HTTPException(400, detail=f"invalid {name}={value!r}; "
                                            f"allowed: {list(allowed)}")
        return value

    try:
        k = int(fields.get("k", 8))
        n = int(fields["n"]) if fields.get("n") not in (None, "") else None
    except (TypeError, ValueError):
        raise HTTPException(400, detail="k and n must be integers")

    options = PipelineOptions(
        frames_mode=pick("frames_mode", "basic", FRAMES_MODES),
        aesthetic=pick("aesthetic", "nima", AESTHETIC_BACKENDS),
        style=pick("style", "comixgan", STYLES),
        extractor=str(fields.get("extractor", "stub")),
        k=k, n=n,
    )
    try:
        options.validate()
    except ValueError as exc:
        raise HTTPException(400, detail=str(exc))
    return options


def _error_status(exc: Exception) -> int:
    cause = exc.cause if isinstance(exc, PipelineStageError) else exc
    if isinstance(cause, OversizeError):
        return 413
    if isinstance(cause, FetchError):
        return 502
    if isinstance(cause, (DecodeError, EmptyInputError)):
        return 422
    return 500


def create_app(settings: ServiceSettings) -> FastAPI:
    app = FastAPI(title="comixify")
    models_dir = Path(settings.models_dir)
    workdir = Path(settings.workdir)
    (workdir / "uploads").mkdir(parents=True, exist_ok=True)
    (workdir / "results").mkdir(parents=True, exist_ok=True)
    samples_dir = workdir / "samples"

    store = JobStore(settings.job_store_path)
    executor = ThreadPoolExecutor(max_workers=settings.max_workers)
    app.state.store = store
    app.state.settings = settings

    def run_job(job_id: str, input_spec: dict, options: PipelineOptions):
        record = store.transition(job_id, "running", started_at=time.time())
        timings = {}
        stage = "acquire"
        try:
            t0 = time.perf_counter()
            if "path" in input_spec:
                source = ingest.open_video(input_spec["path"])
            elif "url" in input_spec:
                source = ingest.fetch_remote(input_spec["url"], workdir / "uploads",
                                             byte_cap=settings.upload_cap_bytes)
            else:
                path = samples.ensure_sample(input_spec["sample"], samples_dir)
                source = ingest.open_video(path)
            models = ModelSet(models_dir, options)
            timings[stage] = time.perf_counter() - t0

            result = run_pipeline(source, options, models)
            timings.update(result.timings)

            stage = "write"
            t0 = time.perf_counter()
            page_dir = workdir / "results" / job_id
            paths = write_pages(result, page_dir)
            timings[stage] = time.perf_counter() - t0

            store.transition(
                job_id, "done", finished_at=time.time(), timings=timings,
                pages=[f"/results/{job_id}/{p.name}" for p in paths],
                keyframes=result.keyframes.to_json(),
                frame_count=result.frame_count)
        except Exception as exc:  # every failure must land in the record
            failed_stage = exc.stage if isinstance(exc, PipelineStageError) else stage
            store.transition(job_id, "failed", finished_at=time.time(),
                             timings=timings,
                             error={"stage": failed_stage, "message": str(exc),
                                    "status": _error_status(exc)})

    async def read_request(request: Request) -> tuple[dict, dict]:
        """Returns (input_spec, option_fields); raises HTTPException."""
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            fields = {k: v for k, v in form.items() if isinstance(v, str)}
            upload = form.get("video")
            inputs = []
            if upload is not None and not isinstance(upload, str):
                data = await upload.read()
                if len(data) > settings.upload_cap_bytes:
                    raise HTTPException(413, detail="upload exceeds size cap")
                name = Path(upload.filename or "upload.mp4").name
                dest = workdir / "uploads" / f"{int(time.time() * 1e6)}_{name}"
                dest.write_bytes(data)
                inputs.append({"path": str(dest)})
        else:
            try:
                fields = await request.json()
            except Exception:
                raise HTTPException(400, detail="body must be JSON or multipart form")
            if not isinstance(fields, dict):
                raise HTTPException(400, detail="JSON body must be an object")
            inputs = []
        if fields.get("url"):
            inputs.append({"url": fields["url"]})
        if fields.get("sample"):
            name = fields["sample"]
            if name not in samples.SAMPLE_SPECS:
                raise HTTPException(400, detail=f"unknown sample {name!r}; "
                                                f"allowed: {sorted(samples.SAMPLE_SPECS)}")
            inputs.append({"sample": name})
        if len(inputs) != 1:
            raise HTTPException(400, detail="exactly one input required: "
                                            "video upload, url, or sample")
        return inputs[0], fields

    @app.post("/api/comixify")
    async def comixify(request: Request):
        input_spec, fields = await read_request(request)
        options = _parse_options(fields)
        record = store.create({"input": input_spec, **_options_json(options)})
        job_id = record["job_id"]
        future = executor.submit(run_job, job_id, input_spec, options)

        sync = str(fields.get("sync", "")).lower() in ("1", "true", "yes")
        if sync:
            future.result(timeout=settings.job_timeout_s)
            record = store.get(job_id)
            if record["state"] == "failed":
                return JSONResponse(status_code=record["error"]["status"], content=record)
        else:
            record = store.get(job_id)
        return record

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        record = store.get(job_id)
        if record is None:
            raise HTTPException(404, detail=f"unknown job {job_id!r}")
        return record

    @app.get("/api/samples")
    def get_samples():
        return samples.list_samples(samples_dir)

    @app.get("/api/options")
    def get_options():
        return {
            "frames_mode": list(FRAMES_MODES),
            "aesthetic": list(AESTHETIC_BACKENDS),
            "style": list(STYLES),
            "defaults": {"frames_mode": "basic", "aesthetic": "nima",
                         "style": "comixgan", "k": 8},
            "constraints": {"k_min": 1, "k_divides_n": True},
        }

    @app.get("/results/{job_id}/{filename}")
    def get_result_file(job_id: str, filename: str):
        path = (workdir / "results" / job_id / Path(filename).name).resolve()
        if not path.is_file() or workdir.resolve() not in path.parents:
            raise HTTPException(404, detail="no such result")
        return FileResponse(path, media_type="image/png")

    if settings.ui_dir and Path(settings.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=settings.ui_dir, html=True), name="ui")

    return app


def _options_json(options: PipelineOptions) -> dict:
    return {"frames_mode": options.frames_mode, "aesthetic": options.aesthetic,
            "style": options.style, "extractor": options.extractor,
            "k": options.k, "n": options.n}
