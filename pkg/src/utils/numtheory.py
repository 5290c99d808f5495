"""Provides exact integer helpers shared by the solver components."""
from __future__ import annotations

from math import factorial, isqrt
from typing import Iterator, Sequence

from sympy import divisors, integer_nthroot

from src.components.errors import BudgetExceeded

FACTOR_LIMIT = 2**64


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def exact_root(n: int, k: int) -> int | None:
    """Integer ``r`` with ``r^k == n`` (the nonnegative one for even ``k``), else ``None``."""
    if n < 0:
        if k % 2 == 0:
            return None
        root = exact_root(-n, k)
        return None if root is None else -root
    root, exact = integer_nthroot(n, k)
    return int(root) if exact else None


def floor_root(n: int, k: int) -> int:
    """Largest ``r >= 0`` with ``r^k <= n`` for ``n >= 0``."""
    return int(integer_nthroot(n, k)[0])


def signed_divisors(n: int, limit: int = FACTOR_LIMIT) -> list[int]:
    """All positive and negative divisors of a nonzero integer, ascending.

    Args:
        n: Nonzero integer to factor.
        limit: Largest magnitude the factorization is attempted for.

    Returns:
        Divisors sorted from most negative to most positive.

    Raises:
        BudgetExceeded: ``|n|`` exceeds ``limit``.
    """
    if n == 0:
        raise ValueError("zero has no finite divisor set")
    if abs(n) > limit:
        raise BudgetExceeded(f"|{n}| exceeds the factorization ceiling")
    positive = [int(d) for d in divisors(abs(n))]
    return [-d for d in reversed(positive)] + positive


def ordered_factorizations(n: int, k: int, limit: int = FACTOR_LIMIT) -> Iterator[tuple[int, ...]]:
    """Every ordered ``k``-tuple of integers whose product is ``n`` (``n != 0``)."""
    if k == 1:
        yield (n,)
        return
    for d in signed_divisors(n, limit):
        for rest in ordered_factorizations(n // d, k - 1, limit):
            yield (d, *rest)


def poly_eval(coefficients: Sequence[int], x: int) -> int:
    """Evaluate ``sum(c_i * x^i)`` with coefficients listed from degree 0."""
    value = 0
    for c in reversed(coefficients):
        value = value * x + c
    return value


def integer_roots(coefficients: Sequence[int], limit: int = FACTOR_LIMIT) -> list[int]:
    """Integer roots of a nonzero univariate polynomial given lowest degree first."""
    coefs = list(coefficients)
    while coefs and coefs[-1] == 0:
        coefs.pop()
    if not coefs:
        raise ValueError("zero polynomial")
    roots = []
    shift = 0
    while coefs[shift] == 0:
        shift += 1
    if shift:
        roots.append(0)
    reduced = coefs[shift:]
    if len(reduced) > 1:
        roots += [d for d in signed_divisors(reduced[0], limit) if poly_eval(reduced, d) == 0]
    return sorted(roots)


def kempner(m: int) -> int:
    """Least ``v`` with ``m | v!``."""
    v, acc = 0, 1
    while acc % m:
        v += 1
        acc *= v
    return v


def power_cycle(base: int, m: int) -> tuple[int, int]:
    """Preperiod and period of ``base^v mod m`` for ``v = 0, 1, 2, ...``."""
    seen: dict[int, int] = {}
    value, v = 1 % m, 0
    while value not in seen:
        seen[value] = v
        value = value * base % m
        v += 1
    return seen[value], v - seen[value]


def factorial_mod(v: int, m: int) -> int:
    if v >= kempner(m):
        return 0
    return factorial(v) % m

