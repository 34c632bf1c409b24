"""Acceptance criteria, one test per criterion.

Each test runs the matching check from :mod:`rabi_lab.validation` at its
stated tolerance and prints a single PASS/FAIL line. The lines are also
collected and repeated in the terminal summary.
"""
import pytest

from rabi_lab import validation

CRITERIA = [
    (1, "delta-root"),
    (2, "external-ratio"),
    (3, "critical-density"),
    (4, "exact-limits"),
    (5, "parity-exact"),
    (6, "uaa-spectrum"),
    (7, "exact-dynamics"),
    (8, "uaa-dynamics"),
    (9, "strong-field"),
    (10, "rwa-failure"),
    (11, "sum-rule"),
    (12, "bessel-elements"),
    (13, "beta-anchor"),
    (14, "mu-consistency"),
]

def test_every_check_is_listed():
    assert [slug for _, slug in CRITERIA] == list(validation.REGISTRY)


@pytest.mark.slow
@pytest.mark.parametrize("number,slug", CRITERIA, ids=[f"{n:02d}-{s}" for n, s in CRITERIA])
def test_criterion(number, slug, acceptance_lines):
    res = validation.run_check(slug)
    line = f"criterion {number:2d} {res.line()}"
    acceptance_lines.append(line)
    print(line)
    assert res.passed, line
