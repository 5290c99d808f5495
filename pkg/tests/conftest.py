"""Shared fixtures: problem parsing and a brute-force oracle over a box."""
from itertools import product

import pytest

from src.components.errors import DomainViolation
from src.components.expr import Problem
from src.components.parse import parse_problem


def brute_force(problem: Problem, lo: int = -8, hi: int = 8) -> set[tuple[int, ...]]:
    """Every solution of ``problem`` with all variables in ``[lo, hi]``."""
    names = problem.variables
    found = set()
    for point in product(range(lo, hi + 1), repeat=len(names)):
        assignment = dict(zip(names, point))
        if not problem.admits(assignment):
            continue
        try:
            if all(eq.evaluate(assignment) == 0 for eq in problem.equations):
                found.add(point)
        except DomainViolation:
            continue
    return found


@pytest.fixture(scope="session")
def parse():
    return parse_problem


@pytest.fixture(scope="session")
def oracle():
    return brute_force
