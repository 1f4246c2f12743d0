import re
import csv
import json

from dataclasses import dataclass
from typing import Any, Mapping, Tuple, Union

import numpy as np

from openpyxl import Workbook
from openpyxl.utils.cell import get_column_letter
from openpyxl.worksheet.table import Table as WorksheetTable, TableStyleInfo

Value = Union[int, float, str]

TABLE_STYLE = "TableStyleMedium9"

@dataclass(frozen=True)
class Table:
    """A header and rows of values, all rows as wide as the header.
    """

    header : Tuple[str, ...]
    data : Tuple[Tuple[Value, ...], ...]

    def __post_init__(self):
        header = tuple(str(h) for h in self.header)
        data = tuple(tuple(row) for row in self.data)

        assert len(header) > 0, "A table needs at least one column"
        for index, row in enumerate(data):
            assert len(row) == len(header), \
                "Row %d has %d values, header has %d columns" % (index + 1, len(row), len(header))

        object.__setattr__(self, 'header', header)
        object.__setattr__(self, 'data', data)

    @property
    def is_empty(self) -> bool:
        return len(self.data) == 0

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def columns(self) -> int:
        return len(self.header)

    def get_values(self) -> Tuple[Tuple[Value, ...], ...]:
        return (self.header,) + self.data

    def column(self, name : str) -> np.ndarray:
        assert name in self.header, "Unknown column %s" % name
        index = self.header.index(name)
        return np.array([row[index] for row in self.data])

def format_value(value : Any) -> str:
    """Deterministic text for a table cell: integers and booleans as
    integers, reals with 12 significant digits.
    """

    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)

def write_csv(table : Table, path : str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.data:
            writer.writerow([format_value(v) for v in row])

def write_json(data : Mapping[str, Any], path : str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")

def _sheet_title(name : str) -> str:
    return re.sub(r'[\[\]:*?/\\]', '_', name)[:31]

def _table_name(name : str) -> str:
    display = re.sub(r'[^A-Za-z0-9_]', '_', name)
    if not re.match(r'^[A-Za-z_]', display):
        display = "T_" + display
    return display

def write_workbook(tables : Mapping[str, Table], path : str):
    """Write each table to its own worksheet and register it as a named
    worksheet table so it can be referenced by name in Excel.
    """

    workbook = Workbook()
    workbook.remove(workbook.active)

    for name, table in tables.items():
        worksheet = workbook.create_sheet(title=_sheet_title(name))

        worksheet.append(list(table.header))
        for row in table.data:
            worksheet.append([
                bool(v) if isinstance(v, np.bool_) else
                int(v) if isinstance(v, np.integer) else
                float(v) if isinstance(v, np.floating) else v
                for v in row
            ])

        # Excel rejects tables without a data row
        if table.is_empty:
            continue

        ref = "A1:%s%d" % (get_column_letter(table.columns), table.rows + 1)
        worksheet_table = WorksheetTable(displayName=_table_name(name), ref=ref)
        worksheet_table.tableStyleInfo = TableStyleInfo(name=TABLE_STYLE, showRowStripes=True)
        worksheet.add_table(worksheet_table)

    workbook.save(path)
