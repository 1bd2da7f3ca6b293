"""
Frequency-count files, raw-sample files and JSON reports.

A frequency-count file is a CSV with header `l,m_l` and optional metadata lines
`# n=...` and `# k=...`; when present they override the sums of the counts so
that inconsistent published tables can be loaded verbatim.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from gibbs_discovery.core.errors import DataValidationError
from gibbs_discovery.data_sim.summary import RawSample, labels_from_lines
from gibbs_discovery.estimators import SampleSummary

log = logging.getLogger("data_sim.io")


def parse_frequency_counts(text: str) -> SampleSummary:
    meta: Dict[str, int] = {}
    body: List[str] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line.lstrip("#").strip().partition("=")
            if sep and key.strip() in ("n", "k"):
                try:
                    meta[key.strip()] = int(value.strip())
                except ValueError as exc:
                    raise DataValidationError(f"bad metadata line {raw_line!r}") from exc
            continue
        body.append(line)

    reader = csv.DictReader(body)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["l", "m_l"]:
        raise DataValidationError("frequency-count file needs the header 'l,m_l'")
    counts: Dict[int, int] = {}
    for row in reader:
        try:
            l, m = int(row["l"]), int(row["m_l"])
        except (TypeError, ValueError) as exc:
            raise DataValidationError(f"bad frequency row {row}") from exc
        if l in counts:
            raise DataValidationError(f"frequency l={l} listed twice")
        counts[l] = m
    if not any(counts.values()):
        raise DataValidationError("frequency-count file has no species")
    return SampleSummary.from_counts(counts, n=meta.get("n"), k=meta.get("k"))


def read_frequency_counts(path: Path) -> SampleSummary:
    with Path(path).open("r", encoding="utf-8") as handle:
        return parse_frequency_counts(handle.read())


def format_frequency_counts(s: SampleSummary) -> str:
    out = io.StringIO()
    out.write(f"# n={s.n}\n# k={s.k}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["l", "m_l"])
    for l, c in sorted(s.m.items()):
        writer.writerow([l, c])
    return out.getvalue()


def write_frequency_counts(s: SampleSummary, path: Path) -> None:
    Path(path).write_text(format_frequency_counts(s), encoding="utf-8")


def read_raw_sample(path: Path) -> RawSample:
    with Path(path).open("r", encoding="utf-8") as handle:
        return labels_from_lines(handle.readlines())


def looks_like_frequency_counts(path: Path) -> bool:
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                return line.replace(" ", "") == "l,m_l"
    return False


def build_report(
    dataset: str,
    prior: Optional[Dict[str, Any]],
    estimates: Iterable[Dict[str, Any]],
    metrics: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    return {"dataset": dataset, "prior": prior, "estimates": list(estimates), "metrics": metrics or {}}


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def estimates_csv(rows: Iterable[Dict[str, Any]]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=["l", "value", "lo", "hi", "method"], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in writer.fieldnames})
    return out.getvalue()
