"""
Report documents and table exports
JSON report documents with a schema version, delimited-text tables and xlsx workbooks
"""
import csv
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import openpyxl
from openpyxl.utils import get_column_letter

from config import lab_config

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

REPORT_DOC = 'report-doc'
DELIMITED_TEXT = 'delimited-text'
WORKBOOK = 'workbook'
FORMATS = (REPORT_DOC, DELIMITED_TEXT, WORKBOOK)

TRAJECTORY_COLUMNS = (
    ['s']
    + [f'{name}{i}' for name in ('A', 'B', 'C', 'gamma') for i in range(1, 5)]
    + ['pairing_drift']
)
SURFACE_COLUMNS = ['s', 'u', 'x1', 'x2', 'x3', 'x4', 'membership_residual']


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def build_report(command: str, results: Any, arguments: Optional[Dict[str, Any]] = None,
                 passed: Optional[bool] = None) -> Dict[str, Any]:
    """Structured report document; no timestamps so equal inputs give equal bytes"""
    return {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'arguments': arguments or {},
        'settings': lab_config.as_dict(),
        'passed': passed,
        'results': results,
    }


def render_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_to_jsonable)


def write_report(report: Dict[str, Any], path: str) -> str:
    """Write a report document as JSON"""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(render_report(report))
        f.write('\n')
    logger.info(f"Report written to {path}")
    return path


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _cell(value: Any) -> Any:
    if value is None:
        return ''
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return ' '.join(str(_cell(v)) for v in value)
    return value


def write_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str], path: str) -> str:
    """Delimited-text table with a fixed column order"""
    _ensure_parent(path)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in columns])
    logger.info(f"Table written to {path}")
    return path


def write_workbook(sheets: Dict[str, tuple], path: str) -> str:
    """
    xlsx workbook, one sheet per table.

    Args:
        sheets: sheet title -> (columns, rows)
        path: output file
    """
    _ensure_parent(path)
    workbook = openpyxl.Workbook()
    workbook.remove(workbook.active)
    for title, (columns, rows) in sheets.items():
        sheet = workbook.create_sheet(title=title[:31])
        sheet.append(list(columns))
        for row in rows:
            values = []
            for col in columns:
                value = row.get(col)
                if isinstance(value, (np.floating, np.integer)):
                    value = value.item()
                elif isinstance(value, (list, tuple, np.ndarray)):
                    value = _cell(value)
                values.append(value)
            sheet.append(values)
        for idx, col in enumerate(columns, start=1):
            sheet.column_dimensions[get_column_letter(idx)].width = max(12, len(str(col)) + 2)
    workbook.save(path)
    logger.info(f"Workbook written to {path}")
    return path


def export_tables(tables: Dict[str, tuple], base_path: str, fmt: str) -> List[str]:
    """
    Export named tables as csv files (base_name_table.csv) or one workbook.

    Args:
        tables: name -> (columns, rows)
        base_path: output path without the table suffix
        fmt: DELIMITED_TEXT or WORKBOOK
    """
    stem, _ = os.path.splitext(base_path)
    if fmt == WORKBOOK:
        return [write_workbook(tables, f"{stem}.xlsx")]
    if fmt == DELIMITED_TEXT:
        return [write_csv(rows, columns, f"{stem}_{name}.csv") for name, (columns, rows) in tables.items()]
    raise ValueError(f"Unknown table format {fmt!r}; use one of {FORMATS}")


# ============================================
# Row builders
# ============================================

def trajectory_rows(traj, stride: int = 1) -> List[Dict[str, float]]:
    """One row per stride-th trajectory sample: s, frame columns, pairing drift"""
    from bscroll import pairing_drift

    rows = []
    for i in range(0, len(traj.s), stride):
        frame = traj.X[i]
        row = {'s': float(traj.s[i])}
        for j, name in enumerate(('A', 'B', 'C', 'gamma')):
            for k in range(4):
                row[f'{name}{k + 1}'] = float(frame[k, j])
        row['pairing_drift'] = pairing_drift(frame)[0]
        rows.append(row)
    return rows


def surface_rows(samples) -> List[Dict[str, float]]:
    rows = []
    for sample in samples:
        row = {'s': sample.s, 'u': sample.u, 'membership_residual': sample.membership_residual}
        for k in range(4):
            row[f'x{k + 1}'] = float(sample.x[k])
        rows.append(row)
    return rows
