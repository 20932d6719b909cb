"""Batch jobs: a guarded state machine, a round-robin scheduler with a
bounded worker pool, and quota-doubling reruns.

Every state transition is appended to a JSONL journal; replaying the journal
restores the job table and re-queues anything that had not finished."""

from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

from ..query.executor import (
    ExecError,
    ExecLimits,
    QuotaExceededError,
    TableResult,
    execute,
)
from ..query.parser import QuerySyntaxError, parse
from ..query.planner import PlanError, RegistryView, plan as plan_query
from ..query.ast import print_query
from ..tiers import DEFAULT_TIERS, Tier
from .mydb import MyDbQuotaError, MyDbStore, WorkspaceError

MAX_DOUBLINGS = 3

QUEUED = "queued"
RUNNING = "running"
SUCCEEDED = "succeeded"
FAILED = "failed"
CANCELLED = "cancelled"
QUOTA_EXCEEDED = "quota_exceeded"

LEGAL_TRANSITIONS: dict[str, frozenset[str]] = {
    QUEUED: frozenset({RUNNING, CANCELLED}),
    RUNNING: frozenset({SUCCEEDED, FAILED, QUOTA_EXCEEDED}),
    SUCCEEDED: frozenset(),
    FAILED: frozenset(),
    CANCELLED: frozenset(),
    QUOTA_EXCEEDED: frozenset(),
}

TERMINAL_STATES = frozenset(s for s, nxt in LEGAL_TRANSITIONS.items() if not nxt)


class IllegalTransition(RuntimeError):
    pass


class JobError(ValueError):
    pass


@dataclass
class JobRecord:
    id: int
    owner: str
    text: str  # canonical query text
    tier: str
    elapsed_s: float
    row_cap: int
    doublings_used: int = 0
    state: str = QUEUED
    submitted: float = 0.0
    started: float | None = None
    finished: float | None = None
    target: str | None = None  # INTO table name, if any
    error: str = ""
    rows: int | None = None
    truncated: bool = False

    def transition(self, new_state: str, now: float) -> None:
        if new_state not in LEGAL_TRANSITIONS.get(self.state, frozenset()):
            raise IllegalTransition(f"{self.state} -> {new_state}")
        self.state = new_state
        if new_state == RUNNING:
            self.started = now
        elif new_state in TERMINAL_STATES:
            self.finished = now

    def to_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_obj(cls, obj: dict) -> "JobRecord":
        return cls(**obj)


Runner = Callable[[JobRecord], TableResult]


def make_runner(clients: Mapping[str, object], mydb: MyDbStore | None = None) -> Runner:
    """Default job runner: plan against the live client set and execute
    under the job's quota. INTO targets deposit into the owner's personal
    database — only after the query fully succeeds."""

    def run(job: JobRecord) -> TableResult:
        ast = parse(job.text)
        registry = RegistryView({n: c.describe() for n, c in clients.items()})
        qplan = plan_query(ast, registry)
        deposit = None
        if job.target is not None and mydb is not None:

            def deposit(name: str, result: TableResult) -> None:
                mydb.upload_table(
                    job.owner, job.owner, name, result.columns, result.rows,
                    replace=True,
                )

        return execute(
            qplan, clients, ExecLimits(job.elapsed_s, job.row_cap), deposit=deposit
        )

    return run


class Scheduler:
    """Bounded worker pool, round-robin across owners, FIFO within owner."""

    def __init__(
        self,
        runner: Runner,
        mydb: MyDbStore | None = None,
        tiers: dict[str, Tier] | None = None,
        max_doublings: int = MAX_DOUBLINGS,
        workers: int = 2,
        journal: str | Path | None = None,
        clock: Callable[[], float] = time.time,
        auto_start: bool = True,
    ):
        self.runner = runner
        self.mydb = mydb
        self.tiers = dict(tiers) if tiers is not None else dict(DEFAULT_TIERS)
        self.max_doublings = max_doublings
        self.workers = workers
        self.clock = clock
        self._journal = Path(journal) if journal is not None else None
        self._jobs: dict[int, JobRecord] = {}
        self._queues: dict[str, deque[int]] = {}
        self._rotation: deque[str] = deque()
        self._next_id = 1
        self._running = 0
        self._cv = threading.Condition()
        self._threads: list[threading.Thread] = []
        self._stop = False
        if self._journal is not None and self._journal.exists():
            self._replay()
        if auto_start:
            self.start()

    # -- journal --------------------------------------------------------------

    def _append(self, entry: dict) -> None:
        if self._journal is None:
            return
        with open(self._journal, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry) + "\n")
            f.flush()

    def _replay(self) -> None:
        with open(self._journal, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                if entry["op"] == "submit":
                    job = JobRecord.from_obj(entry["job"])
                    self._jobs[job.id] = job
                    self._next_id = max(self._next_id, job.id + 1)
                else:
                    job = self._jobs[entry["id"]]
                    job.state = entry["state"]
                    job.started = entry.get("started", job.started)
                    job.finished = entry.get("finished", job.finished)
                    job.error = entry.get("error", job.error)
                    job.rows = entry.get("rows", job.rows)
                    job.truncated = entry.get("truncated", job.truncated)
        # anything that had not reached a terminal state runs again
        for job in sorted(self._jobs.values(), key=lambda j: j.id):
            if job.state not in TERMINAL_STATES:
                job.state = QUEUED
                job.started = None
                self._enqueue(job)

    def _log_state(self, job: JobRecord) -> None:
        self._append(
            {
                "op": "state",
                "id": job.id,
                "state": job.state,
                "started": job.started,
                "finished": job.finished,
                "error": job.error,
                "rows": job.rows,
                "truncated": job.truncated,
            }
        )

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        if self._threads:
            return
        self._stop = False
        for i in range(self.workers):
            t = threading.Thread(target=self._worker, name=f"job-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        with self._cv:
            self._stop = True
            self._cv.notify_all()
        for t in self._threads:
            t.join()
        self._threads = []

    def drain(self, timeout: float = 60.0) -> None:
        """Block until no job is queued or running."""
        deadline = time.monotonic() + timeout
        with self._cv:
            while any(q for q in self._queues.values()) or self._running:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError("jobs still pending after drain timeout")
                self._cv.wait(remaining)

    # -- submission api ---------------------------------------------------------

    def submit(self, owner: str, text: str, tier: str) -> JobRecord:
        if tier not in self.tiers:
            raise JobError(f"unknown tier {tier!r}")
        try:
            ast = parse(text)
        except QuerySyntaxError as e:
            raise JobError(f"query rejected: {e}")
        if ast.into is not None and self.mydb is not None and not self.mydb.exists(owner):
            raise JobError(f"INTO target requires a personal database for {owner!r}")
        base = self.tiers[tier]
        with self._cv:
            job = JobRecord(
                id=self._next_id,
                owner=owner,
                text=print_query(ast),
                tier=tier,
                elapsed_s=base.elapsed_s,
                row_cap=base.row_cap,
                submitted=self.clock(),
                target=ast.into,
            )
            self._next_id += 1
            self._jobs[job.id] = job
            self._append({"op": "submit", "job": job.to_obj()})
            self._enqueue(job)
            self._cv.notify_all()
        return job

    def rerun_with_doubled_quota(self, job_id: int) -> JobRecord:
        with self._cv:
            prior = self._require(job_id)
            if prior.state != QUOTA_EXCEEDED:
                raise JobError(f"job {job_id} is {prior.state}, not quota_exceeded")
            if prior.doublings_used >= self.max_doublings:
                raise JobError(
                    f"doubling limit: job {job_id} already used "
                    f"{prior.doublings_used} of {self.max_doublings} doublings"
                )
            job = JobRecord(
                id=self._next_id,
                owner=prior.owner,
                text=prior.text,
                tier=prior.tier,
                elapsed_s=prior.elapsed_s * 2,
                row_cap=prior.row_cap * 2,
                doublings_used=prior.doublings_used + 1,
                submitted=self.clock(),
                target=prior.target,
            )
            self._next_id += 1
            self._jobs[job.id] = job
            self._append({"op": "submit", "job": job.to_obj()})
            self._enqueue(job)
            self._cv.notify_all()
        return job

    def cancel(self, job_id: int) -> JobRecord:
        with self._cv:
            job = self._require(job_id)
            job.transition(CANCELLED, self.clock())
            self._queues[job.owner].remove(job_id)
            self._log_state(job)
            return replace(job)

    def job_status(self, job_id: int) -> JobRecord:
        with self._cv:
            return replace(self._require(job_id))

    def list_jobs(
        self, owner: str | None = None, state: str | None = None
    ) -> list[JobRecord]:
        with self._cv:
            out = []
            for jid in sorted(self._jobs):
                j = self._jobs[jid]
                if owner is not None and j.owner != owner:
                    continue
                if state is not None and j.state != state:
                    continue
                out.append(replace(j))
            return out

    # -- internals --------------------------------------------------------------

    def _require(self, job_id: int) -> JobRecord:
        if job_id not in self._jobs:
            raise JobError(f"unknown job {job_id}")
        return self._jobs[job_id]

    def _enqueue(self, job: JobRecord) -> None:
        if job.owner not in self._queues:
            self._queues[job.owner] = deque()
            self._rotation.append(job.owner)
        self._queues[job.owner].append(job.id)

    def _take_next(self) -> JobRecord | None:
        """Round-robin: the owner at the head of the rotation yields one job
        and moves to the back."""
        for _ in range(len(self._rotation)):
            owner = self._rotation[0]
            self._rotation.rotate(-1)
            q = self._queues[owner]
            if q:
                return self._jobs[q.popleft()]
        return None

    def _worker(self) -> None:
        while True:
            with self._cv:
                job = None
                while not self._stop and (job := self._take_next()) is None:
                    self._cv.wait()
                if self._stop and job is None:
                    return
                job.transition(RUNNING, self.clock())
                self._running += 1
                self._log_state(job)
            error = ""
            rows = None
            truncated = False
            try:
                result = self.runner(job)
                outcome = SUCCEEDED
                rows = result.rows_emitted
                truncated = result.truncated
            except QuotaExceededError as e:
                outcome, error = QUOTA_EXCEEDED, str(e)
            except (
                MyDbQuotaError,
                WorkspaceError,
                PlanError,
                ExecError,
                QuerySyntaxError,
                ValueError,
                RuntimeError,
            ) as e:
                outcome, error = FAILED, str(e)
            with self._cv:
                job.transition(outcome, self.clock())
                job.error = error
                job.rows = rows
                job.truncated = truncated
                self._log_state(job)
                self._running -= 1
                self._cv.notify_all()
