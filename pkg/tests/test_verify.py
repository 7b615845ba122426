import pytest

from lnop import tensor
from lnop.cli import main
from lnop.verify import gradient_errors, run_suites, solver_checks


@pytest.fixture(scope="module")
def results():
    return run_suites()


def test_fresh_checkout_passes_every_suite(results):
    assert [r.name for r in results] == ["gradients", "dft", "contractions", "solvers"]
    assert all(r.passed for r in results), [r.line() for r in results]


def test_verdicts_are_repeatable(results):
    assert [r.line() for r in run_suites()] == [r.line() for r in results]


def test_solver_checks_within_tolerance():
    for name, (value, tol) in solver_checks().items():
        assert value <= tol, name


def test_corrupted_backward_rule_fails_gradient_suite(monkeypatch, capsys):
    good = tensor.BACKWARD_RULES["mode_mix"]
    monkeypatch.setitem(tensor.BACKWARD_RULES, "mode_mix", lambda g, node: tuple(
        None if x is None else 1.01 * x for x in good(g, node)))
    assert any(r > 1 for r in gradient_errors("learnable", 1).values())
    code = main(["verify", "--suite", "gradients"])
    out = capsys.readouterr().out
    assert code != 0 and out.startswith("FAIL gradients")


def test_crashing_suite_is_reported(monkeypatch):
    monkeypatch.setitem(tensor.BACKWARD_RULES, "relu", None)
    (result,) = run_suites(["gradients"])
    assert not result.passed and "raised TypeError" in result.detail
