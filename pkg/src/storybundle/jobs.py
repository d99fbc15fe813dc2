"""In-process background jobs for oracle-bound operations.

Simulation, induction and re-classification can take a while against a live
backend, so their endpoints return a job id immediately and the client polls
job status.
"""

from __future__ import annotations

import threading
import traceback
import uuid
from dataclasses import dataclass, field


@dataclass
class Job:
    job_id: str
    kind: str
    status: str = "pending"  # pending | running | done | error
    result: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "result": self.result,
            "error": self.error,
        }


class JobRegistry:
    def __init__(self, synchronous: bool = False):
        # synchronous mode runs jobs inline; used by tests and the CLI.
        self.synchronous = synchronous
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, kind: str, fn) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job

        def run():
            job.status = "running"
            try:
                job.result = fn()
                job.status = "done"
            except Exception as e:
                job.error = f"{e}\n{traceback.format_exc()}"
                job.status = "error"

        if self.synchronous:
            run()
        else:
            threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(f"unknown job: {job_id!r}")
            return self._jobs[job_id]
