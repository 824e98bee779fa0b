"""Embedded job persistence (sqlite), with an in-memory mode for tests."""

import json
import sqlite3
import threading
import time
import uuid

STATES = ("queued", "running", "done", "failed")
_TRANSITIONS = {"queued": {"running", "failed"}, "running": {"done", "failed"},
                "done": set(), "failed": set()}


def new_job_id() -> str:
    return uuid.uuid4().hex


class JobStore:
    """Key-value job records; every update rewrites the record atomically."""

    def __init__(self, path=None):
        self._conn = sqlite3.connect(str(path) if path else ":memory:",
                                     check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS jobs (id TEXT PRIMARY KEY, record TEXT NOT NULL)")
            self._conn.commit()

    def create(self, request: dict) -> dict:
        record = {
            "job_id": new_job_id(),
            "state": "queued",
            "created_at": time.time(),
            "started_at": None,
            "finished_at": None,
            "request": request,
            "timings": {},
            "pages": [],
            "error": None,
        }
        self._write(record)
        return record

    def get(self, job_id: str):
        with self._lock:
            row = self._conn.execute("SELECT record FROM jobs WHERE id = ?",
                                     (job_id,)).fetchone()
        return json.loads(row[0]) if row else None

    def transition(self, job_id: str, state: str, **updates) -> dict:
        """Move a job to ``state``, applying extra field updates atomically."""
        if state not in STATES:
            raise ValueError(f"unknown state {state!r}")
        with self._lock:
            row = self._conn.execute("SELECT record FROM jobs WHERE id = ?",
                                     (job_id,)).fetchone()
            if row is None:
                raise KeyError(job_id)
            record = json.loads(row[0])
            if state not in _TRANSITIONS[record["state"]]:
                raise ValueError(f"illegal transition {record['state']} -> {state}")
            record["state"] = state
            record.update(updates)
            self._conn.execute("UPDATE jobs SET record = ? WHERE id = ?",
                               (json.dumps(record), job_id))
            self._conn.commit()
        return record

    def _write(self, record: dict):
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO jobs (id, record) VALUES (?, ?)",
                (record["job_id"], json.dumps(record)))
            self._conn.commit()

    def close(self):
        self._conn.close()
