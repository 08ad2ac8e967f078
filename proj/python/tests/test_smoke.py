import os
import pathlib

import pytest

import eva

DATA = pathlib.Path(os.environ.get("EVA_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def x2y3():
    p = eva.Program(8)
    x = p.input("cipher", 60)
    y = p.input("cipher", 30)
    xx = p.instruction("MULTIPLY", [x, x])
    yy = p.instruction("MULTIPLY", [y, y])
    yyy = p.instruction("MULTIPLY", [yy, y])
    out = p.instruction("MULTIPLY", [xx, yyy])
    p.output(out, 30)
    return p


def test_round_trip_text():
    p = x2y3()
    assert eva.loads(eva.dumps(p)) == p


def test_compile_reports_parameters():
    res = eva.compile(x2y3())
    assert res["bits"] == [60, 60, 60, 60, 60]
    assert res["r"] == len(res["bits"])
    assert eva.validate(res["program"]) == []


def test_execute_matches_plain_arithmetic():
    res = eva.compile(x2y3())
    out = eva.execute(res["program"], {0: [0.5] * 8, 1: [2.0] * 8}, threads=2)
    assert out[0] == pytest.approx([0.25 * 8.0] * 8)


def test_load_data_file():
    p = eva.load(str(DATA / "x2y3.eva"))
    assert len(p.instructions) == 4


def test_errors_are_typed():
    with pytest.raises(eva.ParseError):
        eva.loads("{not json")
    with pytest.raises(eva.ExecutionError):
        eva.execute(x2y3(), {0: [1.0]})
