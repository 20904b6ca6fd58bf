import io

import pytest

from fblab import cli
from fblab.mutants import MUTATIONS
from fblab.verify import CHECKS, run_checks, verify_suite


def test_suite_passes_with_one_line_per_check():
    buf = io.StringIO()
    assert verify_suite(0, buf) is True
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(CHECKS) + 1
    assert all(line.startswith("PASS ") for line in lines[:-1])
    assert [line.split()[1] for line in lines[:-1]] == [name for name, _ in CHECKS]
    assert lines[-1] == f"{len(CHECKS)}/{len(CHECKS)} invariants passed"


@pytest.mark.parametrize("seed", [1, 2])
def test_suite_passes_other_seeds(seed):
    failed = [(n, d) for n, ok, d in run_checks(seed) if not ok]
    assert failed == []


def test_check_names_unique():
    names = [n for n, _ in CHECKS]
    assert len(names) == len(set(names))


def test_sign_cap_reported_gracefully():
    (res,) = [r for r in run_checks(0) if r[0] == "summing.sign_cap_guard"]
    assert res[1] is True
    assert "25" in res[2] and "cap" in res[2]


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_mutants_are_caught(name):
    with MUTATIONS[name]():
        results = run_checks(0)
    failed = [(n, d) for n, ok, d in results if not ok]
    assert failed, f"mutant {name} went unnoticed"
    # every failure carries a concrete counterexample
    assert all(d for _, d in failed)


def test_mutants_restore_behaviour():
    for name in MUTATIONS:
        with MUTATIONS[name]():
            pass
    assert all(ok for _, ok, _ in run_checks(0))


def test_cli_verify(capsys):
    assert cli.main(["verify", "--seed", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1].endswith("invariants passed")


def test_cli_verify_fails_under_mutant(capsys):
    with MUTATIONS["transposed_adjoint"]():
        assert cli.main(["verify"]) == 1
    assert "FAIL phmaps.adjoint_delta" in capsys.readouterr().out
