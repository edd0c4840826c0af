"""CSV and JSON serialization of solver results.

Floats are written with 17 significant digits in CSV and with ``repr`` in
JSON, both of which parse back to the identical double.
"""

import json
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.core.config import settings
from src.schemas.finite_volume import FV_RECORD_COLUMNS, FvScan
from src.schemas.phase import (
    PHASE_POINT_COLUMNS,
    CriticalPoints,
    DensityCurves,
    GratingProfile,
    PhasePoint,
)
from src.schemas.run import OutputFormat

CRITICAL_POINT_COLUMNS = list(CriticalPoints.__fields__)
GRATING_COLUMNS = ["x", "density", "period", "mean_density", "amplitude", "phase"]
CURVE_COLUMNS = ["delta", "normal", "superradiant"]
FV_TABLE_COLUMNS = ["mu", "branch", "case", *FV_RECORD_COLUMNS]


class Artifact:
    """Rows for CSV plus the JSON document of one command result."""

    def __init__(self, rows: List[Dict[str, Any]], columns: Sequence[str], document: Any):
        self.rows = rows
        self.columns = list(columns)
        self.document = document

    def render(self, output: OutputFormat) -> str:
        if output == OutputFormat.json:
            return json.dumps(_plain(self.document), indent=2) + "\n"
        frame = pd.DataFrame([_plain(row) for row in self.rows], columns=self.columns)
        return frame.to_csv(
            index=False, float_format=f"%.{settings.FLOAT_DIGITS}g", lineterminator="\n"
        )

    def write(self, output: OutputFormat, path: Optional[str] = None) -> None:
        text = self.render(output)
        if path:
            Path(path).write_text(text)
        else:
            sys.stdout.write(text)


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def phase_points_artifact(points: Sequence[PhasePoint]) -> Artifact:
    rows = [{column: getattr(p, column) for column in PHASE_POINT_COLUMNS} for p in points]
    document = rows[0] if len(rows) == 1 else rows
    return Artifact(rows, PHASE_POINT_COLUMNS, document)


def sweep_artifact(points: Sequence[PhasePoint]) -> Artifact:
    rows = [{column: getattr(p, column) for column in PHASE_POINT_COLUMNS} for p in points]
    return Artifact(rows, PHASE_POINT_COLUMNS, rows)


def critical_points_artifact(critical: CriticalPoints) -> Artifact:
    row = critical.dict()
    return Artifact([row], CRITICAL_POINT_COLUMNS, row)


def grating_artifact(profile: GratingProfile) -> Artifact:
    meta = {
        "period": profile.period,
        "mean_density": profile.mean_density,
        "amplitude": profile.amplitude,
        "phase": profile.phase,
    }
    rows = [{"x": x, "density": d, **meta} for x, d in profile.samples]
    document = {**meta, "samples": [{"x": x, "density": d} for x, d in profile.samples]}
    return Artifact(rows, GRATING_COLUMNS, document)


def curves_artifact(curves: DensityCurves) -> Artifact:
    rows = [
        {"delta": d, "normal": n, "superradiant": s}
        for d, n, s in zip(curves.delta, curves.normal, curves.superradiant)
    ]
    return Artifact(rows, CURVE_COLUMNS, rows)


def fv_artifact(scan: FvScan) -> Artifact:
    rows = [
        {"mu": scan.mu, "branch": scan.branch, "case": scan.case, **record.dict()}
        for record in scan.records
    ]
    return Artifact(rows, FV_TABLE_COLUMNS, scan.dict())
