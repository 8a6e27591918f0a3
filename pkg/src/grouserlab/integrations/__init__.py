"""
Integrations package for grouserlab.

Contains spreadsheet export of campaign, fit and validation tables.
"""

from .workbook import read_workbook, write_workbook

__all__ = ["read_workbook", "write_workbook"]
