from pathlib import Path

import numpy as np
import pytest

from glbpaver.problems import (
    ProblemSyntaxError, builtin_problem, eco, load_problem, parse_problem,
    resolve_problem,
)
from glbpaver.search import TaskQueue

PROBLEM_DIR = Path(__file__).resolve().parent.parent / "problems"


def _fp(p, eps):
    q = TaskQueue.root(p, eps)
    q.run_to_completion()
    return q.fingerprint()


def test_parse_disks_text():
    p = load_problem(PROBLEM_DIR / "disks.ncsp")
    assert (p.n, p.n_f, p.n_g) == (4, 2, 0)
    assert p.kind == "under-constrained"


def test_parse_well_constrained_single_variable():
    p = parse_problem("var x in [0, 10];\ncon x ^ 2 - 4 = 0;")
    assert (p.n, p.n_f, p.n_g) == (1, 1, 0)
    assert p.kind == "well-constrained"


@pytest.mark.parametrize("text,line,fragment", [
    ("var x in [1, 0];", 1, "empty domain"),
    ("var x in [0, 1];\ncon y = 0;", 2, "unknown identifier"),
    ("var x in [0, 1];\ncon x + = 0;", 2, "expected an expression"),
    ("var x in [0, 1];\nvar x in [0, 2];", 2, "already declared"),
    ("var sqrt in [0, 1];", 1, "reserved"),
    ("var x in [0, 1];\ncon x > 0;", 2, "unexpected character"),
    ("var x in [0, 1];\ncon x = 0", 2, None),
    ("var x in [0, 1];\ncon x^1.5 = 0;", 2, None),
])
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ProblemSyntaxError) as info:
        parse_problem(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)
    if fragment:
        assert fragment in str(info.value)


def test_comments_and_blank_lines_are_ignored():
    p = parse_problem("# header\n\nvar x in [0, 1];  # trailing\ncon x - 0.5 < 0;\n")
    assert (p.n, p.n_g) == (1, 1)


@pytest.mark.parametrize("name", ["disks", "eco5", "sphere-plane(3)"])
def test_round_trip_preserves_paving(name):
    p = builtin_problem(name)
    q = parse_problem(p.to_text())
    assert q.to_text() == p.to_text()
    eps = 1e-6 if name.startswith("eco") else 0.1
    assert np.array_equal(_fp(p, eps), _fp(q, eps))


def test_builtin_disks_matches_shipped_file():
    eps = 0.05
    assert np.array_equal(_fp(builtin_problem("disks"), eps),
                          _fp(load_problem(PROBLEM_DIR / "disks.ncsp"), eps))


def test_builtin_names_and_errors():
    assert builtin_problem("eco", 8).n == 8
    assert builtin_problem("eco(6)").n == 6
    assert builtin_problem("sphere-plane", 4).n == 4
    with pytest.raises(ValueError):
        builtin_problem("nope")
    with pytest.raises(ValueError):
        resolve_problem("nope:x")
    with pytest.raises(ValueError):
        eco(1)


def test_eco_structure():
    p = eco(4)
    assert (p.n, p.n_f) == (4, 4)
    assert all(c.lo == -100 and c.hi == 100 for c in p.domain)
    text = p.to_text()
    assert "x4" in text and text.count("con ") == 4


def test_resolve_problem_paths():
    assert resolve_problem("builtin:disks").n == 4
    assert resolve_problem(f"file:{PROBLEM_DIR / 'rpr3.ncsp'}").n == 7
    with pytest.raises(OSError):
        resolve_problem("file:/nonexistent/problem.ncsp")


@pytest.mark.parametrize("name,count", [("henon2", 4), ("henon4", 8)])
def test_henon_files_have_expected_orbit_counts(name, count):
    p = load_problem(PROBLEM_DIR / f"{name}.ncsp")
    q = TaskQueue.root(p, 1e-8)
    q.run_to_completion()
    assert q.result() == (0, count)


def test_rpr_file_is_under_constrained():
    p = load_problem(PROBLEM_DIR / "rpr3.ncsp")
    assert (p.n, p.n_f) == (7, 4)
