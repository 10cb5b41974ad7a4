"""Result records and their csv / json-lines emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

PASS, FAIL, FLAG = "pass", "fail", "flag"
STATUSES = (PASS, FAIL, FLAG)


@dataclass
class ResultRecord:
    """One measured inequality or identity.

    ``margin >= 0`` means the checked statement holds; it is NaN only when
    nothing could be measured.  ``flags`` name every hypothesis failure or
    recorded numeric error.
    """

    experiment: str
    params: dict
    measured: dict
    bound: dict
    margin: float
    status: str = PASS
    flags: tuple = ()

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        self.margin = float(self.margin)
        self.flags = tuple(self.flags)


def judge(margin: float, tol: float, flags: Sequence[str] = ()) -> str:
    if flags:
        return FLAG
    return PASS if margin >= -tol else FAIL


def make_record(experiment, params, measured, bound, margin, tol, flags=()) -> ResultRecord:
    return ResultRecord(experiment, dict(params), dict(measured), dict(bound), margin,
                        judge(float(margin), tol, flags), tuple(flags))


def _sort_key(rec: ResultRecord):
    def one(v):
        if isinstance(v, bool):
            return (0, float(v), "")
        if isinstance(v, (int, float)):
            return (0, float(v) if not math.isnan(v) else math.inf, "")
        return (1, 0.0, str(v))

    return tuple((k, one(rec.params[k])) for k in rec.params)


def sort_records(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    """Deterministic parameter order; ties keep production order."""
    return sorted(records, key=_sort_key)


# ---------------------------------------------------------------------------
# number formatting
# ---------------------------------------------------------------------------

def fmt_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, int, float)):
        return fmt_number(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if hasattr(v, "__float__"):
        return fmt_number(float(v))
    return json.dumps(str(v))


def record_to_json(rec: ResultRecord) -> str:
    return _json_value({
        "experiment": rec.experiment, "params": rec.params, "measured": rec.measured,
        "bound": rec.bound, "margin": rec.margin, "status": rec.status, "flags": list(rec.flags),
    })


def record_from_json(line: str) -> ResultRecord:
    d = json.loads(line)
    return ResultRecord(d["experiment"], d["params"], d["measured"], d["bound"], d["margin"],
                        d["status"], tuple(d["flags"]))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, int, float)) or hasattr(v, "__float__"):
        return fmt_number(v)
    return str(v)


def columns(records: Sequence[ResultRecord]) -> list[str]:
    """``experiment, param.*, measured.*, bound.*, margin, status, flags``; each group sorted."""
    groups = {"param": set(), "measured": set(), "bound": set()}
    for r in records:
        groups["param"].update(r.params)
        groups["measured"].update(r.measured)
        groups["bound"].update(r.bound)
    cols = ["experiment"]
    for g in ("param", "measured", "bound"):
        cols += [f"{g}.{k}" for k in sorted(groups[g])]
    return cols + ["margin", "status", "flags"]


def records_to_csv_body(records: Sequence[ResultRecord]) -> str:
    cols = columns(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(cols)
    for r in records:
        row = {"experiment": r.experiment, "margin": r.margin, "status": r.status, "flags": ";".join(r.flags)}
        for k, v in r.params.items():
            row[f"param.{k}"] = v
        for k, v in r.measured.items():
            row[f"measured.{k}"] = v
        for k, v in r.bound.items():
            row[f"bound.{k}"] = v
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def records_to_jsonl_body(records: Sequence[ResultRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def metadata_line(experiment: str, seed: int, fmt: str) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if fmt == "csv":
        return f"# unidym experiment={experiment} seed={seed} generated={stamp}\n"
    return json.dumps({"meta": {"experiment": experiment, "seed": seed, "generated": stamp}}) + "\n"


def emit(records: Sequence[ResultRecord], path, fmt: str = "csv", experiment: str = "", seed: int = 0) -> Path:
    """Write records to ``path``; the first line is metadata (the only place a timestamp appears)."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    body = records_to_csv_body(records) if fmt == "csv" else records_to_jsonl_body(records)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(metadata_line(experiment, seed, fmt))
        fh.write(body)
    return path


def body_of(path) -> str:
    """File contents minus the metadata line."""
    text = Path(path).read_text(encoding="utf-8")
    return text.split("\n", 1)[1] if "\n" in text else ""


def read_jsonl(path) -> list[ResultRecord]:
    out = []
    for line in body_of(path).splitlines():
        if line.strip():
            out.append(record_from_json(line))
    return out


def read_csv(path) -> list[dict]:
    return list(csv.DictReader(io.StringIO(body_of(path))))
