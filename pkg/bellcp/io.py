"""
File formats: dataset JSON, jpd JSON, trial-log CSV with its meta sidecar,
and the report documents written by the CLI.

Every JSON writer goes through ``dumps`` (sorted keys, two-space indent,
doubles at 17 significant digits, trailing newline) so identical inputs
give byte-identical files.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel, TypeAdapter, ValidationError

from bellcp.analysis import AnalysisReport
from bellcp.bchsh import QUAD_ATOMS, FineVerdict, QuadJpd
from bellcp.errors import MalformedDocument, MalformedRecord
from bellcp.kh import SixAtom, SixVarJpd, VARIABLES
from bellcp.models import (
    CELL_KEYS,
    CONTEXT_KEYS,
    AnalysisReportDocument,
    ChshEstimateDocument,
    DatasetDocument,
    FineVerdictDocument,
    JpdRecord,
    QuadRecord,
    SignalingDocument,
    SignalingTestDocument,
    TrialLogMeta,
    parse_number,
)
from bellcp.numeric import ArithmeticMode, to_json_number
from bellcp.observational import CONTEXTS, ObservationalDataset, SignalingReport
from bellcp.simulator import COLUMNS, TrialLog

logger = logging.getLogger(__name__)

_JPD_ADAPTER = TypeAdapter(list[JpdRecord])
_INT64_MIN, _INT64_MAX = -(2**63), 2**63 - 1


def _float_text(value: float) -> str:
    """17 significant digits, always with a decimal point or exponent."""
    if not math.isfinite(value):
        return json.dumps(value)
    text = format(value, ".17g")
    if not any(ch in text for ch in ".e"):
        text += ".0"
    return text


def _encode(value, level: int = 0) -> str:
    if isinstance(value, float):
        return _float_text(value)
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in sorted(value.items())]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + _encode(v, level + 1) for v in value) + "\n" + pad + "]"
    return json.dumps(value)


def dumps(document) -> str:
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json", by_alias=True)
    return _encode(document) + "\n"


def _write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name}")


def _read_json(path: str | Path):
    data = Path(path).read_bytes()
    try:
        return json.loads(data.decode("utf-8"), parse_constant=_reject_constant)
    except UnicodeDecodeError as exc:
        raise MalformedDocument(f"{path}: not UTF-8 text at byte {exc.start}") from exc
    except ValueError as exc:
        raise MalformedDocument(f"{path}: invalid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# Dataset JSON
# ---------------------------------------------------------------------------

def load_dataset(path: str | Path, mode: ArithmeticMode | None = None) -> ObservationalDataset:
    mode = mode or ArithmeticMode.default()
    raw = _read_json(path)
    try:
        document = DatasetDocument.model_validate(raw)
    except ValidationError as exc:
        raise MalformedDocument(f"{path}: {exc}") from exc
    ds = document.to_dataset(mode)
    logger.debug("loaded %s dataset from %s", ds.mode.value, path)
    return ds


def dump_dataset(ds: ObservationalDataset, path: str | Path) -> None:
    _write_text(path, dumps(DatasetDocument.from_dataset(ds)))


# ---------------------------------------------------------------------------
# Six-variable jpd JSON
# ---------------------------------------------------------------------------

def jpd_records(jpd: SixVarJpd) -> list[dict]:
    return [
        {**dict(zip(VARIABLES, atom)), "p": to_json_number(w)}
        for atom, w in jpd.records()
    ]


def dump_jpd(jpd: SixVarJpd, path: str | Path) -> None:
    _write_text(path, dumps(jpd_records(jpd)))


def load_jpd(path: str | Path, mode: ArithmeticMode | None = None) -> SixVarJpd:
    mode = mode or ArithmeticMode.default()
    raw = _read_json(path)
    try:
        records = _JPD_ADAPTER.validate_python(raw)
    except ValidationError as exc:
        raise MalformedDocument(f"{path}: {exc}") from exc
    weights = {}
    for r in records:
        atom = SixAtom(r.a1, r.a2, r.b1, r.b2, r.ra, r.rb)
        if atom in weights:
            raise MalformedDocument(f"{path}: atom {tuple(atom)} listed twice")
        weights[atom] = parse_number(r.p, mode)
    return SixVarJpd(weights)


def quad_records(jpd: QuadJpd) -> list[QuadRecord]:
    return [
        QuadRecord(a1=a[0], a2=a[1], b1=a[2], b2=a[3], p=to_json_number(jpd.weights[a]))
        for a in QUAD_ATOMS
    ]


# ---------------------------------------------------------------------------
# Trial-log CSV
# ---------------------------------------------------------------------------

def meta_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".meta.json")


def write_trial_log(log: TrialLog, path: str | Path) -> None:
    """CSV with header ``trial_id,ra,rb,a1,a2,b1,b2`` plus the ``<path>.meta.json`` sidecar."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, log.table(), fmt="%d", delimiter=",", header=",".join(COLUMNS), comments="")
    meta = TrialLogMeta(seed=log.seed, n=log.n, source=log.source)
    _write_text(meta_path(path), dumps(meta))


def _decode_lines(path: str | Path) -> io.StringIO:
    data = Path(path).read_bytes()
    try:
        return io.StringIO(data.decode("utf-8"), newline="")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(data.count(b"\n", 0, exc.start) + 1, "not UTF-8 text") from exc


def read_trial_log(path: str | Path) -> TrialLog:
    """Parse a trial CSV; the sidecar is optional for external data."""
    rows: list[list[int]] = []
    reader = csv.reader(_decode_lines(path))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != list(COLUMNS):
        raise MalformedRecord(1, f"header must be {','.join(COLUMNS)}")
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(COLUMNS):
            raise MalformedRecord(line, f"expected {len(COLUMNS)} fields, got {len(row)}")
        try:
            values = [int(v) for v in row]
        except ValueError as exc:
            raise MalformedRecord(line, f"non-integer field ({exc})") from exc
        if any(not _INT64_MIN <= v <= _INT64_MAX for v in values):
            raise MalformedRecord(line, "field outside the 64-bit integer range")
        rows.append(values)

    seed, source = None, ""
    sidecar = meta_path(path)
    if sidecar.exists():
        try:
            meta = TrialLogMeta.model_validate(_read_json(sidecar))
        except ValidationError as exc:
            raise MalformedDocument(f"{sidecar}: {exc}") from exc
        seed, source = meta.seed, meta.source

    log = TrialLog.from_table(np.array(rows, dtype=np.int64), seed=seed, source=source)
    problem = log.first_invalid()
    if problem is not None:
        index, reason = problem
        raise MalformedRecord(index + 2, reason)
    return log


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def fine_document(verdict: FineVerdict) -> FineVerdictDocument:
    return FineVerdictDocument(
        feasible=verdict.feasible,
        witness=quad_records(verdict.witness) if verdict.witness is not None else None,
        violated_inequality=verdict.violated_inequality,
        chsh_variants={k: to_json_number(v) for k, v in verdict.chsh_variants.items()},
        max_variant=verdict.max_variant,
        lp_feasible=verdict.lp_feasible,
        chsh_feasible=verdict.chsh_feasible,
        methods_agree=verdict.methods_agree,
    )


def _delta_keys(deltas: dict) -> dict[str, str | float]:
    return {f"{i}{'+' if alpha == 1 else '-'}": to_json_number(d) for (i, alpha), d in deltas.items()}


def signaling_document(report: SignalingReport, diagnosis=None) -> SignalingDocument:
    doc = SignalingDocument(
        a_side_deltas=_delta_keys(report.a_side_deltas),
        b_side_deltas=_delta_keys(report.b_side_deltas),
        max_delta=to_json_number(report.max_delta),
        no_signaling=report.no_signaling,
        tol=to_json_number(report.tol),
    )
    if diagnosis is not None:
        doc = doc.model_copy(update={
            "generators_independent": diagnosis.generators_independent,
            "independence_conditions": dict(diagnosis.conditions),
            "causes": {d: c.value for d, c in diagnosis.causes.items()},
        })
    return doc


def report_document(report: AnalysisReport) -> AnalysisReportDocument:
    estimate = report.estimate
    return AnalysisReportDocument(
        n=estimate.n,
        n_per_context={CONTEXT_KEYS[ctx]: n for ctx, n in report.n_per_context.items()},
        counts={
            CONTEXT_KEYS[ctx]: {CELL_KEYS[cell]: c for cell, c in estimate.counts[ctx].items()}
            for ctx in CONTEXTS
        },
        empirical_dataset=DatasetDocument.from_dataset(report.dataset),
        chsh=ChshEstimateDocument(value=report.chsh.value, standard_error=report.chsh.standard_error),
        chsh_all_variants={k: to_json_number(v) for k, v in report.chsh_variants.items()},
        chsh_tilde=to_json_number(report.chsh_tilde),
        matching=report.matching,
        fine=fine_document(report.fine) if report.fine is not None else None,
        fine_error=report.fine_error,
        signaling=signaling_document(report.signaling),
        signaling_tests=[
            SignalingTestDocument(
                side=t.side.value, i=t.i, alpha=t.alpha,
                successes=list(t.successes), trials=list(t.trials),
                delta=t.delta, z=t.z, p_value=t.p_value, p_value_bonferroni=t.p_value_bonferroni,
            )
            for t in report.tests
        ],
        signaling_detected=report.signaling_detected,
        significance_level=report.significance_level,
    )


def dump_report(document: BaseModel | dict | list, path: str | Path | None = None) -> str:
    """Serialize a report; write it to ``path`` when given. Returns the text."""
    text = dumps(document)
    if path is not None:
        _write_text(path, text)
    return text
