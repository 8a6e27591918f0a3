"""Tests for the workbook export."""

import math

import pandas as pd
import pytest
from openpyxl import load_workbook

from grouserlab.errors import DataError
from grouserlab.integrations.workbook import read_workbook, write_workbook


def test_one_sheet_per_table(tmp_path):
    summary = pd.DataFrame({"terrain": ["vinyl", "pea_gravel"], "slip_mean": [0.56, math.nan]})
    fits = pd.DataFrame({"family": ["power"], "a": [13.489], "b": [-0.228]})
    path = write_workbook(tmp_path / "report.xlsx", {"aggregates": summary, "fits/best": fits})

    sheets = read_workbook(path)
    assert list(sheets) == ["aggregates", "fits_best"]
    assert sheets["fits_best"]["a"].iloc[0] == pytest.approx(13.489)
    assert pd.isna(sheets["aggregates"]["slip_mean"].iloc[1])

    ws = load_workbook(path)["aggregates"]
    assert ws["A1"].font.bold
    assert ws.freeze_panes == "A2"


def test_no_tables(tmp_path):
    with pytest.raises(DataError):
        write_workbook(tmp_path / "empty.xlsx", {})
