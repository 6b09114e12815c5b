import csv
from pathlib import Path
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

UTILS_DIR = Path(__file__).resolve().parent
DISCOVERY_LOG = UTILS_DIR / "discovery_log.csv"
DISCOVERY_HEADER = ["bron", "event", "detail"]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def append_rows(path: Path, rows: Iterable[Sequence[str]], header: Optional[Sequence[str]] = None) -> int:
    """Append ``rows`` to a CSV file, timestamp first; writes the header for a new file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not path.exists()
    count = 0
    with path.open("a", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in rows:
            if new_file:
                names = list(header) if header else [f"col{i}" for i in range(1, len(row) + 1)]
                writer.writerow(["timestamp"] + names)
                new_file = False
            writer.writerow([_timestamp()] + list(row))
            count += 1
    return count


def append_events(path: Path, source: str, events: Iterable[dict]) -> int:
    """Write explorer events (``conjecture``, ``lemma``, ...) to the discovery log."""
    rows = ([source, e["event"], e["detail"]] for e in events)
    return append_rows(path, rows, DISCOVERY_HEADER)
