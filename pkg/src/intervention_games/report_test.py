import json
import pytest
import numpy as np

from openpyxl import load_workbook

from .report import Table, format_value, write_csv, write_json, write_workbook

def sample_table():
    return Table(("a0_bar", "v_star", "member"), [
        (0.0, 16.0, False),
        (0.52, 18.0, True),
    ])

class TestTable:

    def test_shape(self):
        table = sample_table()

        assert table.header == ("a0_bar", "v_star", "member")
        assert table.rows == 2
        assert table.columns == 3
        assert not table.is_empty
        assert table.get_values()[0] == table.header
        assert table.column("v_star").tolist() == [16.0, 18.0]

    def test_empty(self):
        table = Table(("x",), ())
        assert table.is_empty
        assert table.rows == 0

    def test_validation(self):
        with pytest.raises(AssertionError):
            Table((), ())

        with pytest.raises(AssertionError):
            Table(("x", "y"), [(1.0,)])

        with pytest.raises(AssertionError):
            sample_table().column("missing")

def test_format_value():

    assert format_value(True) == "1"
    assert format_value(np.bool_(False)) == "0"
    assert format_value(3) == "3"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(4.808080808080808) == "4.80808080808"
    assert format_value(np.float64(1e-15)) == "1e-15"
    assert format_value("a_L") == "a_L"

def test_write_csv(tmp_path):

    path = tmp_path / "curve.csv"
    write_csv(sample_table(), str(path))

    assert path.read_text(encoding="utf-8") == "a0_bar,v_star,member\n0,16,0\n0.52,18,1\n"

def test_write_json(tmp_path):

    first = tmp_path / "first.json"
    second = tmp_path / "second.json"

    write_json({"v_star": 18.0, "a0_bar": 5.0, "witness": None}, str(first))
    write_json({"witness": None, "a0_bar": 5.0, "v_star": 18.0}, str(second))

    assert first.read_bytes() == second.read_bytes()
    assert first.read_text(encoding="utf-8").endswith("}\n")
    assert json.loads(first.read_text(encoding="utf-8")) == {"v_star": 18.0, "a0_bar": 5.0, "witness": None}

def test_write_workbook(tmp_path):

    path = str(tmp_path / "results.xlsx")
    tables = {
        "v_star_curve": sample_table(),
        "fig5 a0=0.1": Table(("a1", "a2", "member"), [(np.float64(3.0), np.float64(3.0), np.bool_(True))]),
        "empty": Table(("x",), ()),
    }

    write_workbook(tables, path)

    workbook = load_workbook(path)
    assert workbook.sheetnames == ["v_star_curve", "fig5 a0=0.1", "empty"]

    sheet = workbook["v_star_curve"]
    assert [[c.value for c in row] for row in sheet.iter_rows()] == [
        ["a0_bar", "v_star", "member"],
        [0, 16, False],
        [0.52, 18, True],
    ]
    assert list(sheet.tables.keys()) == ["v_star_curve"]
    assert sheet.tables["v_star_curve"].ref == "A1:C3"

    sheet = workbook["fig5 a0=0.1"]
    assert list(sheet.tables.keys()) == ["fig5_a0_0_1"]
    assert sheet["C2"].value is True

    assert len(workbook["empty"].tables) == 0
