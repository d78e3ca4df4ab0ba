import pytest

from src import selftest
from src.selftest import SELFTESTS, run_selftest

FAST = ["catalan_counts", "cyclic_point", "green_symmetry", "degree_rule", "triangle_closed_form",
        "square_invariance"]


def test_fast_properties_pass():
    df = run_selftest(FAST)
    assert list(df["name"]) == FAST
    assert df["passed"].all(), df.loc[~df["passed"], "detail"].tolist()
    assert (df["seconds"] >= 0).all()


def test_unknown_name_is_rejected():
    with pytest.raises(KeyError):
        run_selftest(["catalan_counts", "no_such_property"])


def test_a_raising_check_counts_as_failed(monkeypatch):
    def explode():
        raise ZeroDivisionError("division by zero")

    monkeypatch.setitem(SELFTESTS, "catalan_counts", explode)
    row = run_selftest(["catalan_counts"]).iloc[0]
    assert not row["passed"]
    assert row["detail"].startswith("ZeroDivisionError")


def test_a_failing_check_keeps_its_detail(monkeypatch):
    monkeypatch.setitem(selftest.SELFTESTS, "degree_rule", lambda: (False, "tree 3 survived"))
    df = run_selftest(["catalan_counts", "degree_rule"])
    assert df["passed"].tolist() == [True, False]
    assert df.loc[1, "detail"] == "tree 3 survived"


@pytest.mark.slow
def test_full_suite_passes():
    df = run_selftest()
    assert len(df) == len(SELFTESTS)
    assert df["passed"].all(), df.loc[~df["passed"], ["name", "detail"]].to_dict(orient="records")
