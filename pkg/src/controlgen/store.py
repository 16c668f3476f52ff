"""Append-oriented JSONL persistence for generation records and review events.

One snapshot line per record state (last write wins at load) plus a sibling
append-only event log. A single writer serializes all mutations; a torn final
line is discarded with a warning on reload.
"""

from __future__ import annotations

import json
import logging
import secrets
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping

from . import gherkin, rubric
from .catalog import ControlTypeId
from .errors import DomainError
from .rubric import Provenance, RubricScore

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.jsonl"
EVENTS_FILE = "events.jsonl"


class RecordStatus(str, Enum):
    DRAFT = "Draft"
    PENDING_REVIEW = "PendingReview"
    ACCEPTED = "Accepted"
    NEEDS_REVISION = "NeedsRevision"
    REJECTED = "Rejected"


# Legal lifecycle edges; everything else is rejected.
VALID_TRANSITIONS: dict[RecordStatus, frozenset[RecordStatus]] = {
    RecordStatus.DRAFT: frozenset({RecordStatus.PENDING_REVIEW}),
    RecordStatus.PENDING_REVIEW: frozenset(
        {RecordStatus.ACCEPTED, RecordStatus.REJECTED, RecordStatus.NEEDS_REVISION}
    ),
    RecordStatus.NEEDS_REVISION: frozenset({RecordStatus.PENDING_REVIEW}),
    RecordStatus.ACCEPTED: frozenset(),
    RecordStatus.REJECTED: frozenset(),
}


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


class DuplicateId(DomainError):
    def __init__(self, record_id: str) -> None:
        super().__init__(f"record id already present: {record_id}")
        self.record_id = record_id


class InvariantViolation(DomainError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"record invariant violated: {reason}")
        self.reason = reason


class IoFailure(DomainError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"store I/O failure: {reason}")


class NotFound(DomainError):
    def __init__(self, record_id: str) -> None:
        super().__init__(f"no record with id {record_id}")
        self.record_id = record_id


class WrongState(DomainError):
    def __init__(self, current: RecordStatus) -> None:
        super().__init__(f"operation not allowed in state {current.value}")
        self.current = current


_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_ulid_lock = threading.Lock()
_last_ulid: tuple[int, int] = (0, 0)


def _encode_base32(value: int, length: int) -> str:
    chars = []
    for _ in range(length):
        chars.append(_CROCKFORD[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


def new_record_id() -> str:
    """ULID-style 26-char id: 48-bit ms timestamp + 80 random bits, strictly
    increasing within this process."""
    global _last_ulid
    with _ulid_lock:
        ts = int(time.time() * 1000) & ((1 << 48) - 1)
        rand = secrets.randbits(80)
        last_ts, last_rand = _last_ulid
        if ts < last_ts:
            ts = last_ts
        if ts == last_ts and rand <= last_rand:
            rand = last_rand + 1
        _last_ulid = (ts, rand)
    return _encode_base32(ts, 10) + _encode_base32(rand, 16)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class Finding:
    severity: Severity
    message: str


@dataclass
class GenerationRecord:
    id: str
    created_at: datetime
    updated_at: datetime
    service: str
    resource: str
    control_type: ControlTypeId
    prompt_hash: str
    provider_name: str
    raw_output: str
    control: gherkin.GherkinControl | None
    findings: list[Finding]
    rubric: RubricScore
    status: RecordStatus
    score: float | None = None
    elapsed_ms: int = 0
    provider_latency_ms: int = 0

    def has_error_findings(self) -> bool:
        return any(f.severity is Severity.ERROR for f in self.findings)


@dataclass(frozen=True)
class ReviewEvent:
    record_id: str
    reviewer: str
    criteria: dict[str, int]
    score: float | None
    decision: RecordStatus
    at: datetime


def validate_record(record: GenerationRecord) -> None:
    if record.updated_at < record.created_at:
        raise InvariantViolation("updated_at precedes created_at")
    status = record.status
    if status is RecordStatus.PENDING_REVIEW:
        if record.control is None:
            raise InvariantViolation("PendingReview requires a parsed control")
        if record.has_error_findings():
            raise InvariantViolation("PendingReview forbids Error findings")
    if status in (RecordStatus.ACCEPTED, RecordStatus.NEEDS_REVISION, RecordStatus.REJECTED):
        if not record.rubric.complete:
            raise InvariantViolation(f"{status.value} requires a complete rubric")
        value = rubric.final_score(record.rubric).value
        if record.score is None or abs(record.score - value) > 1e-9:
            raise InvariantViolation(f"{status.value} requires the computed final score")
        if status is RecordStatus.ACCEPTED and value < rubric.ACCEPTANCE_THRESHOLD:
            raise InvariantViolation("Accepted requires score >= 2.5")
        if status is RecordStatus.REJECTED and value >= rubric.ACCEPTANCE_THRESHOLD:
            raise InvariantViolation("Rejected requires score < 2.5")
        if status is RecordStatus.NEEDS_REVISION and value < rubric.ACCEPTANCE_THRESHOLD:
            raise InvariantViolation("NeedsRevision requires score >= 2.5")


def _criterion_to_dict(cv: rubric.CriterionValue) -> dict:
    return {"value": cv.value, "provenance": cv.provenance.value}


def _criterion_from_dict(doc: dict) -> rubric.CriterionValue:
    return rubric.CriterionValue(
        value=doc.get("value"), provenance=Provenance(doc["provenance"])
    )


def rubric_to_dict(score: RubricScore) -> dict:
    return {name: _criterion_to_dict(score.get(name)) for name in rubric.CRITERIA}


def rubric_from_dict(doc: dict) -> RubricScore:
    return RubricScore(**{name: _criterion_from_dict(doc[name]) for name in rubric.CRITERIA})


def record_to_dict(record: GenerationRecord) -> dict:
    return {
        "id": record.id,
        "created_at": record.created_at.isoformat(),
        "updated_at": record.updated_at.isoformat(),
        "service": record.service,
        "resource": record.resource,
        "control_type": record.control_type.value,
        "prompt_hash": record.prompt_hash,
        "provider_name": record.provider_name,
        "raw_output": record.raw_output,
        "control": gherkin.serialize(record.control) if record.control else None,
        "findings": [
            {"severity": f.severity.value, "message": f.message} for f in record.findings
        ],
        "rubric": rubric_to_dict(record.rubric),
        "status": record.status.value,
        "score": record.score,
        "elapsed_ms": record.elapsed_ms,
        "provider_latency_ms": record.provider_latency_ms,
    }


def record_from_dict(doc: dict) -> GenerationRecord:
    control_text = doc.get("control")
    return GenerationRecord(
        id=doc["id"],
        created_at=datetime.fromisoformat(doc["created_at"]),
        updated_at=datetime.fromisoformat(doc["updated_at"]),
        service=doc["service"],
        resource=doc["resource"],
        control_type=ControlTypeId(doc["control_type"]),
        prompt_hash=doc["prompt_hash"],
        provider_name=doc["provider_name"],
        raw_output=doc["raw_output"],
        control=gherkin.parse(control_text) if control_text else None,
        findings=[
            Finding(Severity(f["severity"]), f["message"]) for f in doc.get("findings", [])
        ],
        rubric=rubric_from_dict(doc["rubric"]),
        status=RecordStatus(doc["status"]),
        score=doc.get("score"),
        elapsed_ms=doc.get("elapsed_ms", 0),
        provider_latency_ms=doc.get("provider_latency_ms", 0),
    )


class RecordStore:
    """Single-writer store over a directory holding records.jsonl + events.jsonl."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.records_path = self.directory / RECORDS_FILE
        self.events_path = self.directory / EVENTS_FILE
        self._lock = threading.Lock()
        self._records: dict[str, GenerationRecord] = {}
        self._load()

    def _load(self) -> None:
        if not self.records_path.exists():
            return
        try:
            lines = self.records_path.read_text(encoding="utf-8").split("\n")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        if lines and lines[-1] == "":
            lines.pop()
        for i, line in enumerate(lines):
            try:
                doc = json.loads(line)
                record = record_from_dict(doc)
            except (json.JSONDecodeError, KeyError, ValueError, gherkin.GherkinError) as exc:
                if i == len(lines) - 1:
                    logger.warning("discarding torn final record line: %s", exc)
                    continue
                raise IoFailure(f"corrupt record line {i + 1}: {exc}") from exc
            self._records[record.id] = record

    def _write_snapshot(self, record: GenerationRecord) -> None:
        line = json.dumps(record_to_dict(record), ensure_ascii=False)
        try:
            with self.records_path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        self._records[record.id] = record

    def _write_event(self, event: ReviewEvent) -> None:
        doc = {
            "record_id": event.record_id,
            "reviewer": event.reviewer,
            "criteria": event.criteria,
            "score": event.score,
            "decision": event.decision.value,
            "at": event.at.isoformat(),
        }
        try:
            with self.events_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(doc, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc

    def append(self, record: GenerationRecord) -> str:
        validate_record(record)
        with self._lock:
            if record.id in self._records:
                raise DuplicateId(record.id)
            self._write_snapshot(record)
        return record.id

    def get(self, record_id: str) -> GenerationRecord:
        record = self._records.get(record_id)
        if record is None:
            raise NotFound(record_id)
        return record

    def list_records(
        self,
        status: RecordStatus | None = None,
        control_type: ControlTypeId | None = None,
        service: str | None = None,
    ) -> list[GenerationRecord]:
        out = []
        for record_id in sorted(self._records):
            record = self._records[record_id]
            if status is not None and record.status is not status:
                continue
            if control_type is not None and record.control_type is not control_type:
                continue
            if service is not None and record.service != service:
                continue
            out.append(record)
        return out

    def read_events(self) -> list[ReviewEvent]:
        if not self.events_path.exists():
            return []
        events = []
        for line in self.events_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            events.append(
                ReviewEvent(
                    record_id=doc["record_id"],
                    reviewer=doc["reviewer"],
                    criteria=doc["criteria"],
                    score=doc["score"],
                    decision=RecordStatus(doc["decision"]),
                    at=datetime.fromisoformat(doc["at"]),
                )
            )
        return events

    def record_review(
        self,
        record_id: str,
        criteria: Mapping[str, object],
        *,
        reviewer: str = "anonymous",
        needs_revision: bool = False,
    ) -> GenerationRecord:
        """Apply a (possibly partial) human review.

        A complete rubric decides the status: >= 2.5 is Accepted unless the
        reviewer explicitly asks for NeedsRevision; < 2.5 is Rejected (an
        explicit NeedsRevision request cannot rescue a failing score). A
        partial rubric leaves the status untouched.
        """
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFound(record_id)
            if record.status not in (RecordStatus.PENDING_REVIEW, RecordStatus.NEEDS_REVISION):
                raise WrongState(record.status)
            merged = rubric.apply_human_review(record.rubric, criteria)
            now = utcnow()
            if merged.complete:
                fs = rubric.final_score(merged)
                if fs.value >= rubric.ACCEPTANCE_THRESHOLD:
                    new_status = (
                        RecordStatus.NEEDS_REVISION if needs_revision else RecordStatus.ACCEPTED
                    )
                else:
                    new_status = RecordStatus.REJECTED
                updated = replace_record(
                    record, rubric_score=merged, status=new_status, score=fs.value, at=now
                )
                event_score: float | None = fs.value
            else:
                new_status = record.status
                updated = replace_record(
                    record, rubric_score=merged, status=new_status, score=None, at=now
                )
                event_score = None
            validate_record(updated)
            self._write_snapshot(updated)
            self._write_event(
                ReviewEvent(
                    record_id=record_id,
                    reviewer=reviewer,
                    criteria={k: rubric.check_binary(k, v) for k, v in criteria.items()},
                    score=event_score,
                    decision=new_status,
                    at=now,
                )
            )
            return updated

    def reopen_for_review(self, record_id: str) -> GenerationRecord:
        """NeedsRevision -> PendingReview (after regeneration)."""
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFound(record_id)
            self._assert_transition(record.status, RecordStatus.PENDING_REVIEW)
            updated = replace_record(
                record, rubric_score=record.rubric, status=RecordStatus.PENDING_REVIEW,
                score=None, at=utcnow(),
            )
            validate_record(updated)
            self._write_snapshot(updated)
            return updated

    def submit_for_review(self, record_id: str) -> GenerationRecord:
        """Draft -> PendingReview once a valid control is attached."""
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFound(record_id)
            self._assert_transition(record.status, RecordStatus.PENDING_REVIEW)
            updated = replace_record(
                record, rubric_score=record.rubric, status=RecordStatus.PENDING_REVIEW,
                score=None, at=utcnow(),
            )
            validate_record(updated)
            self._write_snapshot(updated)
            return updated

    @staticmethod
    def _assert_transition(current: RecordStatus, target: RecordStatus) -> None:
        if target not in VALID_TRANSITIONS[current]:
            raise WrongState(current)


def replace_record(
    record: GenerationRecord,
    *,
    rubric_score: RubricScore,
    status: RecordStatus,
    score: float | None,
    at: datetime,
) -> GenerationRecord:
    return replace(record, rubric=rubric_score, status=status, score=score, updated_at=at)
