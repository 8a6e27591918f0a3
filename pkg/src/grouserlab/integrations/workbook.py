"""
Workbook export for report tables.

Each table becomes one sheet with a bold, shaded header row. CSV stays the
primary format; the workbook is a convenience copy of the same frames.
"""

import logging
from pathlib import Path
from typing import Dict, Mapping, Union

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill
from openpyxl.utils import get_column_letter
from openpyxl.utils.dataframe import dataframe_to_rows

from grouserlab.errors import DataError

logger = logging.getLogger(__name__)

HEADER_FONT = Font(bold=True)
HEADER_FILL = PatternFill(start_color="DDEBF7", end_color="DDEBF7", fill_type="solid")
MAX_SHEET_TITLE = 31
_INVALID_TITLE_CHARS = set("[]:*?/\\")


def _sheet_title(name: str) -> str:
    title = "".join("_" if ch in _INVALID_TITLE_CHARS else ch for ch in name)[:MAX_SHEET_TITLE]
    if not title:
        raise DataError(f"cannot use {name!r} as a sheet name")
    return title


def write_workbook(path: Union[str, Path], tables: Mapping[str, pd.DataFrame]) -> Path:
    """
    Write report tables to an ``.xlsx`` workbook.

    Args:
        path: Destination workbook
        tables: Sheet name to frame, in sheet order

    Returns:
        The written path
    """
    if not tables:
        raise DataError("no tables to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    wb = Workbook()
    wb.remove(wb.active)
    for name, frame in tables.items():
        ws = wb.create_sheet(_sheet_title(name))
        # Empty cells instead of NaN
        cleaned = frame.astype(object).where(frame.notna(), None)
        for row in dataframe_to_rows(cleaned, index=False, header=True):
            ws.append(row)
        for col_idx, column in enumerate(frame.columns, start=1):
            cell = ws.cell(row=1, column=col_idx)
            cell.font = HEADER_FONT
            cell.fill = HEADER_FILL
            ws.column_dimensions[get_column_letter(col_idx)].width = max(10, len(str(column)) + 2)
        ws.freeze_panes = "A2"

    wb.save(path)
    logger.info("workbook %s: %d sheet(s)", path, len(tables))
    return path


def read_workbook(path: Union[str, Path]) -> Dict[str, pd.DataFrame]:
    """Every sheet of a workbook as a frame keyed by sheet name."""
    return pd.read_excel(path, sheet_name=None, engine="openpyxl")
