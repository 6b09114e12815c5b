from __future__ import annotations

import json
import logging
from pathlib import Path
from datetime import datetime, timezone

UTILS_DIR = Path(__file__).resolve().parent
MEMORY_FILE = UTILS_DIR / "memory.json"

logger = logging.getLogger(__name__)


class Memory:
    """Run summaries per input name, persisted as one JSON file."""

    def __init__(self, path: Path | None = None):
        self.path = Path(path) if path else MEMORY_FILE
        self.data: dict[str, list[dict]] = {}
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            self.data = {}
            return
        try:
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            logger.warning("memory file %s unreadable, starting empty: %s", self.path, exc)
            self.data = {}

    def _save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, indent=1), encoding="utf-8")

    def add(self, name: str, entry: dict) -> None:
        """Record ``entry`` under ``name`` and persist it."""
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.data.setdefault(name, []).append({"timestamp": stamp, **entry})
        self._save()

    def get(self, name: str) -> list[dict]:
        return self.data.get(name, [])

    def last(self, name: str) -> dict | None:
        runs = self.get(name)
        return runs[-1] if runs else None

    def known_lemmas(self, name: str) -> list[str]:
        """Every lemma recorded for ``name``, first discovery order, no repeats."""
        seen: dict[str, None] = {}
        for run in self.get(name):
            seen.update(dict.fromkeys(run.get("lemmas", [])))
        return list(seen)
