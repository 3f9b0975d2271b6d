"""HTTP API: async detection jobs, evidence/trace inspection and the
explanation rank study.

Detection is job-based because a full pipeline run takes several LLM
round trips: POST /detect returns a job id immediately and clients poll
GET /jobs/{id} until the state turns done or failed. Job execution is
bounded by the gateway rate limit. Jobs and rank submissions are
appended to JSONL logs under the data directory; submissions are
replayed on startup so a restart keeps the study intact.

One submission per (judge, sample): re-submitting is a 409 conflict,
never an overwrite. Schema violations are 400, unknown ids 404.
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .agents import EngineSettings, IndexBundle, run_pipeline_with_evidence
from .corpus import NewsItem
from .errors import OocdetectError
from .evaluation import RankMatrix, average_ranks, is_permutation
from .llm_gateway import LlmGateway


class DetectBody(BaseModel):
    caption: str
    image_ref: str = ""
    image_b64: str | None = None


class SubmissionBody(BaseModel):
    judge_id: str
    sample_id: str
    ranks: dict[str, int]


@dataclass
class RankStudy:
    methods: tuple[str, ...]
    samples: dict[str, dict[str, Any]]  # sample_id -> {caption, image_ref, explanations}

    @classmethod
    def from_file(cls, path: Path) -> "RankStudy":
        raw = json.loads(path.read_text(encoding="utf-8"))
        samples = {str(s["sample_id"]): s for s in raw.get("samples", [])}
        return cls(methods=tuple(raw["methods"]), samples=samples)


@dataclass
class ServiceState:
    settings: EngineSettings
    gateway: LlmGateway
    indices: IndexBundle
    data_dir: Path
    study_path: Path | None = None
    max_workers: int | None = None

    jobs: dict[str, dict[str, Any]] = field(default_factory=dict)
    submissions: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)
    study: RankStudy | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _executor: ThreadPoolExecutor | None = None

    def __post_init__(self) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        if self.study_path is not None:
            self.study = RankStudy.from_file(self.study_path)
        self._executor = ThreadPoolExecutor(
            max_workers=self.max_workers or self.gateway.cfg.rate_limit
        )
        self._replay_submissions()

    # -- persistence --

    def _append_log(self, name: str, record: dict[str, Any]) -> None:
        path = self.data_dir / name
        with self._lock:
            with path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
                handle.write("\n")

    def _replay_submissions(self) -> None:
        path = self.data_dir / "submissions.log"
        if not path.is_file():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            key = (record["judge_id"], record["sample_id"])
            self.submissions[key] = {str(m): int(r) for m, r in record["ranks"].items()}

    # -- jobs --

    def submit_job(self, body: DetectBody) -> str:
        job_id = uuid.uuid4().hex
        image_ref = body.image_ref
        if body.image_b64:
            uploads = self.data_dir / "uploads"
            uploads.mkdir(exist_ok=True)
            blob = base64.b64decode(body.image_b64)
            image_ref = str(uploads / f"{hashlib.sha256(blob).hexdigest()}.bin")
            Path(image_ref).write_bytes(blob)
        job = {
            "job_id": job_id,
            "request": {"caption": body.caption, "image_ref": image_ref},
            "state": "queued",
            "result": None,
            "evidence": None,
            "error": None,
        }
        with self._lock:
            self.jobs[job_id] = job
        self._append_log("jobs.log", {"job_id": job_id, "event": "queued", "request": job["request"]})
        assert self._executor is not None
        self._executor.submit(self._run_job, job_id)
        return job_id

    def _run_job(self, job_id: str) -> None:
        with self._lock:
            job = self.jobs[job_id]
            job["state"] = "running"
        try:
            item = NewsItem(
                id=job_id,
                image_ref=job["request"]["image_ref"],
                caption=job["request"]["caption"],
            )
            verdict, evidence = run_pipeline_with_evidence(
                item, self.indices, self.settings, self.gateway
            )
            with self._lock:
                job["result"] = verdict.to_record()
                job["evidence"] = evidence.to_record()
                job["state"] = "done"
            self._append_log("jobs.log", {"job_id": job_id, "event": "done", "c_ooc": verdict.c_ooc})
        except Exception as exc:
            with self._lock:
                job["error"] = f"{type(exc).__name__}: {exc}"
                job["state"] = "failed"
            self._append_log("jobs.log", {"job_id": job_id, "event": "failed", "error": job["error"]})

    def job_view(self, job_id: str) -> dict[str, Any]:
        with self._lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
            view = {
                "job_id": job["job_id"],
                "request": job["request"],
                "state": job["state"],
                "error": job["error"],
            }
            # The verdict only ships once the job is done.
            view["result"] = job["result"] if job["state"] == "done" else None
            return view

    def job_field(self, job_id: str, key: str) -> Any:
        with self._lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
            return {"job_id": job_id, "state": job["state"], key: job[key] if job["state"] == "done" else None}


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="oocdetect service")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/detect")
    def detect(body: DetectBody) -> dict[str, str]:
        if not body.caption.strip():
            raise HTTPException(status_code=400, detail="caption must be non-empty")
        return {"job_id": state.submit_job(body)}

    @app.get("/jobs/{job_id}")
    def job(job_id: str) -> dict[str, Any]:
        return state.job_view(job_id)

    @app.get("/jobs/{job_id}/trace")
    def trace(job_id: str) -> dict[str, Any]:
        view = state.job_field(job_id, "result")
        result = view["result"]
        return {
            "job_id": job_id,
            "state": view["state"],
            "stages": result["trace"] if result else [],
        }

    @app.get("/jobs/{job_id}/evidence")
    def evidence(job_id: str) -> dict[str, Any]:
        return state.job_field(job_id, "evidence")

    @app.get("/rank-study/samples")
    def samples() -> dict[str, Any]:
        study = _require_study(state)
        return {
            "methods": list(study.methods),
            "samples": [
                {
                    "sample_id": sample_id,
                    "caption": sample.get("caption", ""),
                    "image_ref": sample.get("image_ref", ""),
                    "explanations": sample.get("explanations", {}),
                }
                for sample_id, sample in study.samples.items()
            ],
        }

    @app.post("/rank-study/submissions")
    def submit(body: SubmissionBody) -> dict[str, Any]:
        study = _require_study(state)
        if body.sample_id not in study.samples:
            raise HTTPException(status_code=404, detail=f"unknown sample {body.sample_id!r}")
        if not is_permutation(body.ranks, study.methods):
            raise HTTPException(
                status_code=400,
                detail=f"NotAPermutation: ranks must be a permutation of 1..{len(study.methods)}",
            )
        key = (body.judge_id, body.sample_id)
        with state._lock:
            if key in state.submissions:
                raise HTTPException(
                    status_code=409,
                    detail=f"judge {body.judge_id!r} already ranked sample {body.sample_id!r}",
                )
            state.submissions[key] = dict(body.ranks)
        state._append_log(
            "submissions.log",
            {"judge_id": body.judge_id, "sample_id": body.sample_id, "ranks": body.ranks},
        )
        return {"accepted": True}

    @app.get("/rank-study/report")
    def report() -> dict[str, Any]:
        study = _require_study(state)
        with state._lock:
            rows = dict(state.submissions)
        if not rows:
            return {"methods": list(study.methods), "means": {}, "submissions": 0}
        matrix = RankMatrix(methods=study.methods)
        for (judge, sample), ranks in rows.items():
            matrix.add(judge, sample, ranks)
        try:
            means = average_ranks(matrix)
        except OocdetectError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return {
            "methods": list(study.methods),
            "means": {method: float(value) for method, value in means.items()},
            "submissions": len(rows),
        }

    return app


def _require_study(state: ServiceState) -> RankStudy:
    if state.study is None:
        raise HTTPException(status_code=404, detail="no rank study configured")
    return state.study
