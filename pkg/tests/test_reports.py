import json
import math
from pathlib import Path

import pytest

from core.config import SearchConfig
from core.errors import ConfigError, EmptyProfile
from core.model import make_profile
from reports.exporter import (
    ReportFormat,
    evaluation_payload,
    flatten,
    load_profile_csv,
    load_report,
    to_csv,
    to_json,
    write_report,
)
from reports.table import COLUMNS, Status, TableConfig, reproduce_table, witness_suite


def test_csv_formatting_rule() -> None:
    text = to_csv([{"a": 1 / 3, "b": math.inf, "c": None, "d": True, "e": [0.0, 0.5]}])
    assert text == "a,b,c,d,e\n0.333333333333,inf,,true,0 0.5\n"


def test_csv_column_order_is_fixed() -> None:
    text = to_csv([{"b": 2.0, "a": 1.0}], columns=["a", "b"])
    assert text.splitlines() == ["a,b", "1,2"]


def test_json_carries_infinity_sentinel() -> None:
    payload = json.loads(to_json({"ratio": math.inf, "nested": {"x": [1.5, -math.inf]}}))
    assert payload == {"ratio": "inf", "nested": {"x": [1.5, "-inf"]}}


def test_flatten() -> None:
    assert flatten({"a": 1, "b": {"c": 2, "d": {"e": 3}}}) == {"a": 1, "b.c": 2, "b.d.e": 3}


def test_evaluation_report_round_trip(tmp_path: Path) -> None:
    payload = evaluation_payload(
        mechanism="majority-vote",
        objective="su:1",
        p="1",
        profile=make_profile([0.0, 0.501]),
        alg=0.501,
        opt=1.499,
        opt_location=1.0,
        ratio=1.499 / 0.501,
        convention="ExpectedPower",
    )
    path = tmp_path / "evaluate.json"
    write_report([payload], path, ReportFormat.JSON)
    loaded = load_report(path)
    assert loaded["profile"] == [0.0, 0.501]
    assert loaded["ratio"] == pytest.approx(1.499 / 0.501)


def test_load_profile_csv(tmp_path: Path) -> None:
    path = tmp_path / "profile.csv"
    path.write_text("location\n0.9\n0.2\n\n", encoding="utf-8")
    assert load_profile_csv(path).locations == (0.2, 0.9)
    headless = tmp_path / "headless.csv"
    headless.write_text("0.4\n", encoding="utf-8")
    assert load_profile_csv(headless).locations == (0.4,)


def test_load_profile_csv_errors(tmp_path: Path) -> None:
    wide = tmp_path / "wide.csv"
    wide.write_text("0.1,0.2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_profile_csv(wide)
    empty = tmp_path / "empty.csv"
    empty.write_text("location\n", encoding="utf-8")
    with pytest.raises(EmptyProfile):
        load_profile_csv(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1\nnope\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_profile_csv(bad)
    with pytest.raises(ConfigError):
        load_profile_csv(tmp_path / "missing.csv")


def test_witness_suite_reproduces_every_witness() -> None:
    rows = witness_suite()
    assert all(row.method != "search" for row in rows)
    assert {row.status for row in rows} == {Status.WITNESS_REPRODUCED, Status.UNBOUNDED}
    assert {(row.objective, row.p) for row in rows if row.status == Status.UNBOUNDED} == {
        ("su", "-inf"),
        ("su", "0+"),
    }


@pytest.mark.slow
def test_reproduce_table_covers_every_cell() -> None:
    rows = reproduce_table(TableConfig(search=SearchConfig(grid_step=0.02)))
    statuses = {row.status for row in rows}
    assert Status.FALSIFICATION not in statuses
    assert {Status.UNBOUNDED, Status.CONJECTURE, Status.WITNESS_REPRODUCED, Status.TIGHT} <= statuses
    cells = {(row.objective, row.p) for row in rows}
    for cell in [("su", "inf"), ("su", "0.5"), ("su", "1"), ("su", "2"), ("su", "4"), ("su", "0+"), ("su", "-inf")]:
        assert cell in cells
    for cell in [("sc", "inf"), ("sc", "1"), ("sc", "2"), ("sc", "4")]:
        assert cell in cells
    text = to_csv([row.as_dict() for row in rows], COLUMNS)
    assert text.splitlines()[0] == ",".join(COLUMNS)
