"""Append-only JSON Lines report store.

One record per line, written atomically under a lock; restart replays the
file. Records are immutable once written.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import UnknownAlert
from .orchestrator import Verdict
from .payload import PayloadRecord
from .reporting import ReportDocument


@dataclass
class StoredReport:
    alert_id: str
    report: ReportDocument
    verdict: Verdict
    payload: PayloadRecord

    def to_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "report": self.report.to_dict(),
            "verdict": self.verdict.to_dict(),
            "payload": self.payload.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StoredReport":
        return cls(
            alert_id=data["alert_id"],
            report=ReportDocument.from_dict(data["report"]),
            verdict=Verdict.from_dict(data["verdict"]),
            payload=PayloadRecord.from_dict(data["payload"]),
        )


class ReportStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, StoredReport] = {}
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = StoredReport.from_dict(json.loads(line))
                self._records[record.alert_id] = record

    def append(self, record: StoredReport) -> None:
        line = json.dumps(record.to_dict(), sort_keys=True)
        with self._lock:
            if record.alert_id in self._records:
                raise ValueError(f"alert {record.alert_id} already stored")
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._records[record.alert_id] = record

    def get(self, alert_id: str) -> StoredReport:
        try:
            return self._records[alert_id]
        except KeyError:
            raise UnknownAlert(alert_id) from None

    def __contains__(self, alert_id: str) -> bool:
        return alert_id in self._records

    def __len__(self) -> int:
        return len(self._records)

    def alert_ids(self) -> list[str]:
        return list(self._records)

    def summaries(self) -> list[dict]:
        return [
            {
                "alert_id": r.alert_id,
                "final_class": r.verdict.final_class.label,
                "confidence": r.verdict.confidence,
                "created_at": r.report.created_at,
            }
            for r in self._records.values()
        ]
