"""
Report emission: tab-separated tables or line-delimited JSON records
"""

import json
from typing import Any, Dict, Iterable, List, Literal, Sequence

import pandas as pd

from services.errors import ParseError
from services.harness.schemas.reports import RunRecord, RunReport

Format = Literal["table", "records"]

RUN_COLUMNS = [
    "seed", "true_atom", "k_infinity", "final_price", "theta",
    "checks_passed", "degenerate", "mm_pnl", "error",
]


def emit_table(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    """Fixed column order; floats at 12 significant digits; header only when empty"""
    df = pd.DataFrame(list(rows), columns=list(columns))
    return df.to_csv(sep="\t", index=False, float_format="%.12g", lineterminator="\n")


def emit_lines(records: Iterable[Dict[str, Any]]) -> str:
    return "".join(json.dumps(r, separators=(",", ":"), default=str) + "\n" for r in records)


def _table_row(record: RunRecord) -> Dict[str, Any]:
    row = record.model_dump(include=set(RUN_COLUMNS))
    row["error"] = record.error["code"] if record.error else None
    return row


def emit(report: RunReport, fmt: Format = "table") -> str:
    if fmt == "table":
        return emit_table((_table_row(r) for r in report.records), RUN_COLUMNS)
    header = report.model_dump(mode="json", exclude={"records"})
    return emit_lines([header] + [r.model_dump(mode="json") for r in report.records])


def parse_records(text: str) -> RunReport:
    """Inverse of the records format"""
    lines: List[str] = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty report")
    try:
        header = json.loads(lines[0])
        records = [RunRecord.model_validate_json(line) for line in lines[1:]]
        return RunReport.model_validate({**header, "records": records})
    except ValueError as e:
        raise ParseError(f"malformed report: {e}")
