"""Tabular reports of an exploration run (CSV / Excel) via pandas."""
from io import BytesIO, StringIO
from typing import Tuple

import pandas as pd

EXCEL_MIME = "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"
CSV_MIME = "text/csv"


def lemma_frame(result: dict) -> pd.DataFrame:
    rows = [{"nr": i, "lemma": lemma} for i, lemma in enumerate(result.get("lemmas", []), 1)]
    return pd.DataFrame(rows, columns=["nr", "lemma"])


def phase_frame(stats: dict) -> pd.DataFrame:
    times = stats.get("phase_times", {})
    counts = stats.get("conjectures", {})
    rows = [{"onderdeel": f"tijd.{k}", "waarde": v} for k, v in times.items()]
    rows += [{"onderdeel": f"conjectures.{k}", "waarde": v} for k, v in counts.items()]
    rows.append({"onderdeel": "afgebroken", "waarde": bool(stats.get("truncated"))})
    return pd.DataFrame(rows, columns=["onderdeel", "waarde"])


def genereer_rapport(result: dict, formaat: str = "csv") -> Tuple[str, bytes]:
    """Lemma table as CSV, or a workbook with lemma and statistics sheets."""
    lemmas = lemma_frame(result)
    if formaat == "excel":
        buf = BytesIO()
        with pd.ExcelWriter(buf, engine="openpyxl") as writer:
            lemmas.to_excel(writer, sheet_name="lemmas", index=False)
            phase_frame(result.get("stats", {})).to_excel(writer, sheet_name="statistiek", index=False)
        return EXCEL_MIME, buf.getvalue()
    text = StringIO()
    lemmas.to_csv(text, index=False)
    return CSV_MIME, text.getvalue().encode("utf-8")
