"""Annotation service: task assignment, durable judgment log, and
report generation for the highlights A/B protocol.

Every report metric is computed by the metrics module applied to the
raw judgment log; the service adds no second metric implementation.
Replaying the log reconstructs identical reports.
"""

from __future__ import annotations

import enum
import json
import os
import threading
import time
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import metrics
from .corpus import CharSpan
from .datagen import Example
from .transforms import Label


class Condition(str, enum.Enum):
    HIGHLIGHTS_ON = "HIGHLIGHTS_ON"
    HIGHLIGHTS_OFF = "HIGHLIGHTS_OFF"


class DuplicateJudgmentError(ValueError):
    pass


class UnknownSessionError(KeyError):
    pass


@dataclass(frozen=True)
class Judgment:
    example_id: str
    worker_id: str
    label: Label
    condition: Condition
    elapsed_ms: int
    doc_highlights: tuple[CharSpan, ...] = ()
    claim_highlights: tuple[CharSpan, ...] = ()
    timestamp: float = 0.0

    def to_json(self) -> str:
        return json.dumps({
            "type": "judgment",
            "example_id": self.example_id,
            "worker_id": self.worker_id,
            "label": self.label.value,
            "condition": self.condition.value,
            "elapsed_ms": self.elapsed_ms,
            "doc_highlights": [[s.start, s.end] for s in self.doc_highlights],
            "claim_highlights": [[s.start, s.end] for s in self.claim_highlights],
            "timestamp": self.timestamp,
        }, ensure_ascii=False)


@dataclass(frozen=True)
class SurveyResponse:
    worker_id: str
    article_helpfulness: str  # not / somewhat / very
    claim_helpfulness: str

    def to_json(self) -> str:
        return json.dumps({
            "type": "survey",
            "worker_id": self.worker_id,
            "article_helpfulness": self.article_helpfulness,
            "claim_helpfulness": self.claim_helpfulness,
        }, ensure_ascii=False)


_HELPFULNESS_LEVELS = ("not", "somewhat", "very")


class Session:
    """One annotation session over a fixed dataset.

    Workers pull tasks (fewest-judgments-first, never an item they
    already judged) until every item has n_target judgments. The
    judgment log is append-only JSONL; replaying it restores state.
    """

    def __init__(self, session_id: str, examples: Sequence[Example],
                 n_target: int, highlights_policy: str, log_path: str,
                 predictions: dict | None = None, data_path: str | None = None):
        if highlights_policy not in ("on", "off", "ab"):
            raise ValueError(f"bad highlights policy {highlights_policy!r}")
        self.session_id = session_id
        self.examples = {e.id: e for e in examples}
        self.order = [e.id for e in examples]
        self._order_index = {eid: i for i, eid in enumerate(self.order)}
        self.n_target = n_target
        self.highlights_policy = highlights_policy
        self.log_path = log_path
        self.predictions = predictions or {}
        self.data_path = data_path
        self.judgments: list[Judgment] = []
        self.surveys: list[SurveyResponse] = []
        self._judged: set[tuple[str, str]] = set()
        self._outstanding: dict[str, str] = {}  # worker -> example_id
        self._lock = threading.Lock()
        self._recover()
        self._write_header_if_new()

    # -- persistence ---------------------------------------------------

    def _write_header_if_new(self) -> None:
        path = Path(self.log_path)
        if path.exists() and path.stat().st_size > 0:
            return
        header = json.dumps({
            "type": "session", "session_id": self.session_id,
            "n_target": self.n_target, "highlights_policy": self.highlights_policy,
            "data_path": self.data_path,
        }, ensure_ascii=False)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(header + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _recover(self) -> None:
        path = Path(self.log_path)
        if not path.exists():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj.get("type") == "judgment":
                j = judgment_from_dict(obj)
                self.judgments.append(j)
                self._judged.add((j.worker_id, j.example_id))
            elif obj.get("type") == "survey":
                self.surveys.append(SurveyResponse(
                    obj["worker_id"], obj["article_helpfulness"],
                    obj["claim_helpfulness"]))

    def _append(self, line: str) -> None:
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- assignment ----------------------------------------------------

    def condition_for(self, worker_id: str) -> Condition:
        if self.highlights_policy == "on":
            return Condition.HIGHLIGHTS_ON
        if self.highlights_policy == "off":
            return Condition.HIGHLIGHTS_OFF
        digest = hashlib.sha256(f"{self.session_id}:{worker_id}".encode()).digest()
        return Condition.HIGHLIGHTS_ON if digest[0] % 2 == 0 else Condition.HIGHLIGHTS_OFF

    def _judgment_counts(self) -> dict[str, int]:
        counts = {eid: 0 for eid in self.order}
        for j in self.judgments:
            if j.example_id in counts:
                counts[j.example_id] += 1
        for eid in self._outstanding.values():
            if eid in counts:
                counts[eid] += 1
        return counts

    def next_task(self, worker_id: str) -> dict | None:
        """Next task for the worker, or None when exhausted."""
        with self._lock:
            pending = self._outstanding.get(worker_id)
            if pending is not None:
                return self._task_payload(pending, worker_id)
            counts = self._judgment_counts()
            # Overshoot tolerance of 1 above n_target covers concurrent
            # assignment races.
            candidates = [
                eid for eid in self.order
                if (worker_id, eid) not in self._judged
                and counts[eid] < self.n_target
            ]
            if not candidates:
                return None
            best = min(candidates, key=lambda eid: (counts[eid], self._order_index[eid]))
            self._outstanding[worker_id] = best
            return self._task_payload(best, worker_id)

    def _task_payload(self, example_id: str, worker_id: str) -> dict:
        example = self.examples[example_id]
        condition = self.condition_for(worker_id)
        support, error = self.model_spans(example)
        highlights = None
        if condition == Condition.HIGHLIGHTS_ON and (support or error):
            highlights = {
                "support_span": [support.start, support.end] if support else None,
                "error_span": [error.start, error.end] if error else None,
            }
        return {
            "example_id": example.id,
            "document": example.text,
            "claim": example.claim,
            "condition": condition.value,
            "highlights": highlights,
        }

    def model_spans(self, example: Example) -> tuple[CharSpan | None, CharSpan | None]:
        """Model-side spans for an example: external predictions when
        provided, otherwise the example's own extraction/augmentation
        spans."""
        if example.id in self.predictions:
            _, support, error = self.predictions[example.id]
            return support, error
        return example.extraction_span, example.augmentation_span

    # -- submission ----------------------------------------------------

    def submit(self, judgment: Judgment) -> None:
        if judgment.example_id not in self.examples:
            raise ValueError(f"unknown example {judgment.example_id}")
        if judgment.elapsed_ms <= 0:
            raise ValueError("elapsed_ms must be > 0")
        example = self.examples[judgment.example_id]
        for span in judgment.doc_highlights:
            if span.end > len(example.text):
                raise ValueError(f"document highlight {span} out of bounds")
        for span in judgment.claim_highlights:
            if span.end > len(example.claim):
                raise ValueError(f"claim highlight {span} out of bounds")
        with self._lock:
            key = (judgment.worker_id, judgment.example_id)
            if key in self._judged:
                raise DuplicateJudgmentError(
                    f"worker {judgment.worker_id} already judged {judgment.example_id}")
            self._append(judgment.to_json())
            self.judgments.append(judgment)
            self._judged.add(key)
            if self._outstanding.get(judgment.worker_id) == judgment.example_id:
                del self._outstanding[judgment.worker_id]

    def submit_survey(self, survey: SurveyResponse) -> None:
        if survey.article_helpfulness not in _HELPFULNESS_LEVELS \
                or survey.claim_helpfulness not in _HELPFULNESS_LEVELS:
            raise ValueError(f"helpfulness must be one of {_HELPFULNESS_LEVELS}")
        with self._lock:
            self._append(survey.to_json())
            self.surveys.append(survey)

    # -- reporting -----------------------------------------------------

    def _majority_labels(self, judgments: Sequence[Judgment]) -> dict[str, Label]:
        votes: dict[str, list[Label]] = {}
        for j in judgments:
            votes.setdefault(j.example_id, []).append(j.label)
        majority = {}
        for eid, labels in votes.items():
            consistent = sum(1 for l in labels if l == Label.CONSISTENT)
            if consistent * 2 > len(labels):
                majority[eid] = Label.CONSISTENT
            elif consistent * 2 < len(labels):
                majority[eid] = Label.INCONSISTENT
        return majority

    def _filtered(self, filter_name: str) -> list[Judgment]:
        if filter_name == "raw":
            return list(self.judgments)
        if filter_name == "golden":
            return [j for j in self.judgments
                    if j.label == self.examples[j.example_id].label]
        if filter_name == "majority":
            majority = self._majority_labels(self.judgments)
            return [j for j in self.judgments
                    if j.example_id in majority and j.label == majority[j.example_id]]
        raise ValueError(f"unknown filter {filter_name!r}")

    def report(self, filter_name: str = "raw") -> dict:
        judgments = self._filtered(filter_name)
        if not judgments:
            raise ValueError("no judgments")
        by_item: dict[str, list[Label]] = {}
        for j in judgments:
            by_item.setdefault(j.example_id, []).append(j.label)
        try:
            kappa = metrics.fleiss_kappa_detailed(list(by_item.values()),
                                                  n_raters=self.n_target)
            kappa_block = {
                "fleiss_kappa": kappa.kappa,
                "raters_per_item": kappa.raters_per_item,
                "used_items": kappa.used_items,
                "dropped_items": kappa.dropped_items,
            }
        except (metrics.DegenerateError, ValueError) as exc:
            kappa_block = {"fleiss_kappa": None, "error": str(exc)}

        timing = metrics.timing_summary(
            [(j.condition.value, j.elapsed_ms) for j in judgments])
        timing_block = {
            cond: {"mean_seconds": t.mean_seconds,
                   "median_seconds": t.median_seconds, "count": t.count}
            for cond, t in timing.per_condition.items()
        }

        span_block = {}
        for side in ("document", "claim"):
            pairs, texts, f1s = [], [], []
            for j in judgments:
                example = self.examples[j.example_id]
                support, error = self.model_spans(example)
                model_span = support if side == "document" else error
                worker = j.doc_highlights if side == "document" else j.claim_highlights
                text = example.text if side == "document" else example.claim
                if model_span is None or not worker:
                    continue
                human = CharSpan(min(s.start for s in worker),
                                 max(s.end for s in worker))
                pairs.append((model_span, human))
                texts.append(text)
                f1s.append(metrics.span_token_f1(model_span, human, text))
            if pairs:
                span_block[side] = {
                    "containment_accuracy": metrics.span_containment_accuracy(pairs, texts),
                    "token_f1": sum(f1s) / len(f1s),
                    "pairs": len(pairs),
                }

        helpful_block = None
        if self.surveys:
            def at_least_somewhat(values):
                return sum(1 for v in values if v in ("somewhat", "very")) / len(values)
            helpful_block = {
                "article_at_least_somewhat": at_least_somewhat(
                    [s.article_helpfulness for s in self.surveys]),
                "claim_at_least_somewhat": at_least_somewhat(
                    [s.claim_helpfulness for s in self.surveys]),
                "responses": len(self.surveys),
            }

        majority = self._majority_labels(judgments)
        return {
            "session_id": self.session_id,
            "filter": filter_name,
            "judgment_count": len(judgments),
            "item_count": len(by_item),
            "agreement": kappa_block,
            "timing": timing_block,
            "speed_ratio": timing.speed_ratio,
            "span_overlap": span_block,
            "majority_labels": {eid: lab.value for eid, lab in sorted(majority.items())},
            "helpfulness": helpful_block,
        }


def judgment_from_dict(obj: dict) -> Judgment:
    return Judgment(
        example_id=obj["example_id"],
        worker_id=obj["worker_id"],
        label=Label(obj["label"]),
        condition=Condition(obj["condition"]),
        elapsed_ms=int(obj["elapsed_ms"]),
        doc_highlights=tuple(CharSpan(s, e) for s, e in obj.get("doc_highlights", [])),
        claim_highlights=tuple(CharSpan(s, e) for s, e in obj.get("claim_highlights", [])),
        timestamp=float(obj.get("timestamp", 0.0)),
    )


def read_log(path: str) -> tuple[dict | None, list[Judgment], list[SurveyResponse]]:
    """Parse a judgment log into (session header, judgments, surveys)."""
    header = None
    judgments: list[Judgment] = []
    surveys: list[SurveyResponse] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            kind = obj.get("type")
            if kind == "session":
                header = obj
            elif kind == "judgment":
                judgments.append(judgment_from_dict(obj))
            elif kind == "survey":
                surveys.append(SurveyResponse(
                    obj["worker_id"], obj["article_helpfulness"],
                    obj["claim_helpfulness"]))
    return header, judgments, surveys


def create_app(session: Session, static_dir: str | None = None):
    """FastAPI app exposing the annotation HTTP API."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    app = FastAPI(title="claimcheck annotation service")
    sessions = {session.session_id: session}

    def get_session(session_id: str) -> Session:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return sessions[session_id]

    @app.get("/api/tasks/next")
    def next_task(worker: str, session: str = "default"):
        sess = get_session(session)
        task = sess.next_task(worker)
        if task is None:
            return {"exhausted": True, "task": None}
        return {"exhausted": False, "task": task}

    @app.post("/api/judgments")
    def submit_judgment(payload: dict):
        sess = get_session(payload.get("session", "default"))
        try:
            judgment = Judgment(
                example_id=payload["example_id"],
                worker_id=payload["worker_id"],
                label=Label(payload["label"]),
                condition=Condition(payload["condition"]),
                elapsed_ms=int(payload["elapsed_ms"]),
                doc_highlights=tuple(CharSpan(s, e)
                                     for s, e in payload.get("doc_highlights") or []),
                claim_highlights=tuple(CharSpan(s, e)
                                       for s, e in payload.get("claim_highlights") or []),
                timestamp=time.time(),
            )
            sess.submit(judgment)
        except DuplicateJudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"ok": True}

    @app.post("/api/survey")
    def submit_survey(payload: dict):
        sess = get_session(payload.get("session", "default"))
        try:
            sess.submit_survey(SurveyResponse(
                worker_id=payload["worker_id"],
                article_helpfulness=payload["article_helpfulness"],
                claim_helpfulness=payload["claim_helpfulness"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"ok": True}

    @app.get("/api/report")
    def report(session: str = "default", filter: str = "raw"):
        sess = get_session(session)
        try:
            return JSONResponse(sess.report(filter))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/examples/{example_id}")
    def get_example(example_id: str, session: str = "default"):
        sess = get_session(session)
        if example_id not in sess.examples:
            raise HTTPException(status_code=404, detail=f"unknown example {example_id}")
        e = sess.examples[example_id]
        return {
            "id": e.id, "doc_id": e.doc_id, "text": e.text, "claim": e.claim,
            "extraction_span": [e.extraction_span.start, e.extraction_span.end],
            "augmentation_span": ([e.augmentation_span.start, e.augmentation_span.end]
                                  if e.augmentation_span else None),
        }

    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
