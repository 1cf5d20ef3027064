"""Result rows and their CSV/JSON persistence."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

CSV_COLUMNS = (
    "experiment",
    "N",
    "protocol",
    "cfi_phi",
    "cfi_omega",
    "qfi",
    "t_star_s",
    "objective",
    "snr_bound",
    "seed",
)
DECOMPOSITION_COLUMNS = ("experiment", "N", "protocol", "stage", "value", "region")

_INT_COLUMNS = {"N", "seed"}
_STR_COLUMNS = {"experiment", "protocol", "stage"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(col: str, s: str):
    if s == "":
        return None
    if col in _STR_COLUMNS:
        return s
    if col in _INT_COLUMNS:
        return int(s)
    return float(s)


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    """Floats are written with ``repr`` so they parse back bit-identically."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return [{c: _parse(c, v) for c, v in r.items()} for r in reader]


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


@dataclass
class ResultRecord:
    """Everything one run produced.

    ``results.json`` holds the deterministic part only; timestamps go to a
    separate ``run-info.json`` so identical inputs give identical results.
    """

    experiment: str
    config_hash: str
    seed: int | None
    rows: list[dict]
    columns: tuple[str, ...] = CSV_COLUMNS
    summary: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished: str | None = None

    def results_dict(self) -> dict:
        return _json_safe(
            {
                "experiment": self.experiment,
                "config_hash": self.config_hash,
                "seed": self.seed,
                "columns": list(self.columns),
                "rows": self.rows,
                "summary": self.summary,
                "details": self.details,
            }
        )

    def write(self, out_dir, config_json: str) -> Path:
        """Write results.csv, results.json, config.json and run-info.json."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.finished = datetime.now(timezone.utc).isoformat()
        files = {
            "results.csv": rows_to_csv(self.rows, self.columns),
            "results.json": json.dumps(self.results_dict(), indent=2, sort_keys=True) + "\n",
            "config.json": config_json + "\n",
            "run-info.json": json.dumps({"started": self.started, "finished": self.finished, "config_hash": self.config_hash}, indent=2) + "\n",
        }
        for name, text in files.items():
            atomic_write(out / name, text)
        return out


def atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_results(out_dir) -> dict:
    with open(Path(out_dir) / "results.json") as fh:
        return json.load(fh)
