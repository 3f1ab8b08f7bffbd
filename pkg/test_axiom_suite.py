import pytest

from axiom_suite import (
    AxiomReport,
    check_archimedean_and_halving,
    check_cv_property,
    check_ering_axioms,
    check_qa,
    run_default_suite,
)
from errors import DomainError
from hermitian_core import DEFAULT_TOLERANCES


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_ering_axioms_hold(dim):
    reports = check_ering_axioms(dim, samples=20, seed=7)
    assert [r.axiom for r in reports] == [f"ering.{item}" for item in ("i", "ii", "iii", "iv", "v", "vi")]
    for report in reports:
        assert report.passed, report.to_json()
        assert report.samples == 20


@pytest.mark.parametrize("dim", [2, 4])
def test_qa_holds(dim):
    report = check_qa(dim, samples=30, seed=1)
    assert report.passed, report.to_json()
    assert "perturbations" in report.note


@pytest.mark.parametrize("dim", [1, 3])
def test_archimedean_and_halving(dim):
    report = check_archimedean_and_halving(dim, samples=10, seed=2)
    assert report.passed, report.to_json()


@pytest.mark.parametrize("dim", [2, 3])
def test_cv_property(dim):
    report = check_cv_property(dim, chain_length=4, seed=3, samples=12)
    assert report.passed, report.to_json()


def test_invalid_arguments():
    with pytest.raises(DomainError):
        check_qa(0, samples=5, seed=0)
    with pytest.raises(DomainError):
        check_qa(2, samples=0, seed=0)
    with pytest.raises(DomainError):
        check_cv_property(2, chain_length=1, seed=0)


def test_results_do_not_depend_on_workers():
    serial = check_ering_axioms(3, samples=12, seed=9)
    threaded = check_ering_axioms(3, samples=12, seed=9, config=DEFAULT_TOLERANCES.with_overrides(workers=4))
    assert [r.to_json() for r in serial] == [r.to_json() for r in threaded]


def test_report_json():
    report = AxiomReport("qa", 3, ((5, 0.25),), "note")
    assert not report.passed
    assert report.to_json() == {
        "axiom": "qa",
        "samples": 3,
        "pass": False,
        "failures": [{"seed": 5, "residual": 0.25}],
        "note": "note",
    }
    assert AxiomReport("qa", 3).to_json()["pass"] is True


def test_default_suite_names_reports_by_dimension():
    reports = run_default_suite(dims=(1, 2), samples=4, seed=0, chain_length=3)
    assert len(reports) == 2 * 9
    assert all(r.passed for r in reports), [r.to_json() for r in reports if not r.passed]
    assert reports[0].axiom == "ering.i@dim1"
    assert reports[-1].axiom == "cv@dim2"
