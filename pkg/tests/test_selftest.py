import pylls as ll
from pylls.cli import main


def test_all_checks_pass():
    """
    Every identifiability check holds on seeded instances
    """
    results = ll.run_selftest(seed=0)
    names = [res.name for res in results]
    assert "column_independence" in names
    assert "anchor_factorization" in names
    assert len(set(names)) == len(names)
    for res in results:
        assert res.passed, res
        assert res.seconds >= 0.0


def test_injected_rank_defect():
    """
    A duplicated column is caught by the independence check only
    """
    results = {res.name: res for res in ll.run_selftest(seed=0, perturb_rank=True)}
    assert not results["column_independence"].passed
    assert all(res.passed for name, res in results.items() if name != "column_independence")


def test_selftest_command(capsys):
    """
    Exit code follows the checks
    """
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "IDENTIFIABILITY SELF-TEST" in out
    assert "FAIL" not in out

    assert main(["selftest", "--inject-rank-defect"]) == 2
    out = capsys.readouterr().out
    assert "column_independence" in out
    assert "FAIL" in out
