"""
Exact rational vectors and matrices.

Vectors are tuples of Fraction, matrices are tuples of row tuples. Everything
here is exact; floats never enter.
"""
import math
import re
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from shared.constants import ERRORS

Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text) -> Fraction:
    """Parse "p/q" or integer text into a Fraction.

    Raises:
        ValueError: for decimals, empty strings or a zero denominator
    """
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise ValueError(f"{ERRORS['BAD_RATIONAL']}: {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise ValueError(f"{ERRORS['BAD_RATIONAL']}: {text!r}")


def format_rational(value: Fraction) -> str:
    """Format a Fraction as integer text or "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def vector(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vector(row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def unit(n: int, i: int, scale=1) -> Vector:
    return tuple(Fraction(scale) if j == i else Fraction(0) for j in range(n))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def scale(c, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def mat_vec(m: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, v) for row in m)


def vec_mat(v: Sequence[Fraction], m: Matrix) -> Vector:
    """Row vector times matrix."""
    if not m:
        return ()
    return tuple(dot(v, col) for col in transpose(m))


def transpose(m: Matrix) -> Matrix:
    if not m:
        return ()
    return tuple(zip(*m))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def delete_index(v: Sequence, i: int) -> tuple:
    return tuple(x for j, x in enumerate(v) if j != i)


def delete_row_col(m: Matrix, i: int) -> Matrix:
    return tuple(delete_index(row, i) for j, row in enumerate(m) if j != i)


def insert_zero(v: Sequence[Fraction], i: int) -> Vector:
    """Re-insert a zero coordinate at position i (inverse of delete_index)."""
    return tuple(v[:i]) + (Fraction(0),) + tuple(v[i:])


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in v)


def l1_normalize(v: Sequence[Fraction]) -> Vector:
    total = sum((abs(x) for x in v), Fraction(0))
    if total == 0:
        return tuple(Fraction(x) for x in v)
    return tuple(Fraction(x) / total for x in v)


def primitive(v: Sequence[Fraction]) -> Vector:
    """Scale a row to the primitive integer vector with the same direction."""
    if is_zero(v):
        return tuple(Fraction(0) for _ in v)
    lcm = 1
    for x in v:
        lcm = lcm * Fraction(x).denominator // math.gcd(lcm, Fraction(x).denominator)
    ints = [int(Fraction(x) * lcm) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(Fraction(x // g) for x in ints)


def row_echelon(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination.

    Returns:
        (reduced rows, pivot column indices)
    """
    m = [list(Fraction(x) for x in row) for row in rows]
    if not m:
        return m, []
    n_cols = len(m[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        # find a row k >= r with a nonzero entry in column c
        k = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        pivot = m[r][c]
        m[r] = [x / pivot for x in m[r]]
        for rp in range(len(m)):
            if rp != r and m[rp][c] != 0:
                f = m[rp][c]
                m[rp] = [a - f * b for a, b in zip(m[rp], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return len(row_echelon(rows)[1])

