"""Acceptance battery: every advertised property at its stated tolerance.

One test per criterion, backed by a single shared verification pass.  Each
test prints the quantitative slack line(s) for its criterion, so a verbose
run shows one pass/fail line per property.
"""

import pytest

from quasiflow import verification


@pytest.fixture(scope="session")
def reports():
    return verification.run_all()


def _take(reports, prefix):
    got = [r for r in reports if r.name.startswith(prefix)]
    assert got, f"no verification reports under prefix {prefix}"
    return got


def _assert_all(group):
    for rep in group:
        print(rep.line())
    failed = [rep.line() for rep in group if not rep.passed]
    assert not failed, "\n" + "\n".join(failed)


def test_01_exponential_decay(reports):
    _assert_all(_take(reports, "01"))


def test_02_polynomial_decay(reports):
    _assert_all(_take(reports, "02"))


def test_03_absorbing_ball(reports):
    _assert_all(_take(reports, "03"))


def test_04_branch_bounds(reports):
    _assert_all(_take(reports, "04"))


def test_05_separation_from_constants(reports):
    _assert_all(_take(reports, "05"))


def test_06_lyapunov_descent(reports):
    _assert_all(_take(reports, "06"))


def test_07_mass_inequality(reports):
    group = _take(reports, "07")
    assert len(group) == 3, "expected one report per parameter sign"
    _assert_all(group)


def test_08_gradient_growth(reports):
    _assert_all(_take(reports, "08"))


def test_09_l1_control(reports):
    _assert_all(_take(reports, "09"))


def test_10_product_oracle(reports):
    _assert_all(_take(reports, "10"))


def test_11_stepper_orders(reports):
    _assert_all(_take(reports, "11"))


def test_12_symmetry_preservation(reports):
    _assert_all(_take(reports, "12"))


def test_13_quasicrystal_classification(reports):
    _assert_all(_take(reports, "13"))


def test_14_turing_analysis(reports):
    _assert_all(_take(reports, "14"))


def test_15_brusselator_dynamics(reports):
    _assert_all(_take(reports, "15"))


def test_16_group_algebra(reports):
    _assert_all(_take(reports, "16"))


def test_17_io_and_verify(reports):
    _assert_all(_take(reports, "17"))
    # the verify subcommand exits nonzero iff any report fails
    assert all(r.passed for r in reports), "verify would exit 1"
