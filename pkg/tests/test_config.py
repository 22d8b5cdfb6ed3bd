from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from wavecrit import decay as d
from wavecrit.config import ConfigError, exact, load, parse_config, parse_text, print_config
from wavecrit.decay import DataSpec, NonlinearTerm, WaveSystem

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))

SYSTEMS = [
    d.strauss(3),
    d.critical_system(),
    d.strauss_glassey_system(F(9, 5), 3),
    d.strauss_with_tail(3, 1),
    d.weighted_glassey(3, F(1, 2), 2),
    d.dv_problem(F(3, 2), 2),
]


def test_exact_numbers():
    assert exact("3") == 3
    assert exact(" -1/2 ") == F(-1, 2)
    assert exact("2.41") == F(241, 100)
    assert exact("1e-3") == F(1, 1000)
    with pytest.raises(ValueError):
        exact("two")


@pytest.mark.parametrize("sys", SYSTEMS)
def test_round_trip(sys):
    assert parse_text(print_config(sys)).system == sys


def test_round_trip_with_grid():
    grid = {"h": 0.03125, "v_max": 8192.0, "stretch": 0.03125}
    cfg = parse_text(print_config(d.strauss(2), grid))
    assert cfg.grid == grid


powers = st.fractions(F(11, 10), 5, max_denominator=20)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                          st.sampled_from(["none", "dt", "du", "dv"]), powers,
                          st.floats(0.1, 5), powers), min_size=1, max_size=5),
       st.floats(1e-3, 10))
def test_round_trip_random(terms, amp):
    fields = ("a", "b", "c")
    sys = WaveSystem(3, fields, tuple(NonlinearTerm(e, s, k, q, c, w - 1) for e, s, k, q, c, w in terms),
                     {f: DataSpec(amplitude=amp) for f in fields})
    assert parse_text(print_config(sys)).system == sys


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    sys = parse_config(path)
    assert sys.fields and sys.n == 3


BASE = "[system]\nfields = a\n"


@pytest.mark.parametrize("text,line,fragment", [
    (BASE + "[[term]]\nequation = a\nsource = b\npower = 3\n", 5, "undeclared field"),
    (BASE + "[[term]]\nequation = a\nsource = a\npower = 1\n", 6, "power must exceed 1"),
    (BASE + "[[term]]\nequation = a\nsource = a\nderivative = dx\npower = 3\n", 6, "derivative"),
    (BASE + "foo = 2\n", 3, "unknown field"),
    (BASE + "[[term]\n", 3, "malformed"),
    (BASE + "[term]\n", 3, "[[term]]"),
    (BASE + "[data.a]\nkind = tail\n", 3, "tail exponent"),
    (BASE + "[grid]\nh = fast\n", 4, "could not convert"),
    ("fields = a\n", 1, "outside of any section"),
    (BASE + "[system]\nfields = b\n", 3, "exactly one"),
    ("[system]\ndimension = x\nfields = a\n", 2, "integer"),
    (BASE + "[[term]]\nequation = a\n", 3, "needs 'source'"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_text(text, "sys.cfg")
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"sys.cfg:{line}:")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "absent.cfg")


def test_comments_and_blank_lines():
    text = "# a system\n\n[system]   # header\nfields = a  # one field\n\n[data.a]\namplitude = 0.5\n"
    sys = parse_text(text).system
    assert sys.data["a"].amplitude == 0.5
