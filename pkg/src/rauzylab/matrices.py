"""Nonnegative integer matrices built from elementary Rauzy matrices.

Columns are stored (not rows) because every update touches a single column:
right-multiplying by ``E = I + M[w, l]`` adds column ``w`` into column ``l``.
Entries are Python ints, so long expansions stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ExpansionMatrix:
    cols: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, d: int) -> "ExpansionMatrix":
        return cls(tuple(tuple(int(i == j) for i in range(d)) for j in range(d)))

    @classmethod
    def elementary(cls, d: int, row: int, col: int, r: int = 1) -> "ExpansionMatrix":
        """``I + r M[row, col]`` with 1-based labels."""
        cols = [list(c) for c in cls.identity(d).cols]
        cols[col - 1][row - 1] += r
        return cls(tuple(tuple(c) for c in cols))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "ExpansionMatrix":
        return cls(tuple(tuple(int(r[j]) for r in rows) for j in range(len(rows[0]))))

    @property
    def d(self) -> int:
        return len(self.cols)

    def rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.cols))

    def column(self, label: int) -> tuple[int, ...]:
        return self.cols[label - 1]

    def times_elementary(self, winner: int, loser: int, r: int = 1) -> "ExpansionMatrix":
        """``self @ (I + r M[winner, loser])``: column ``loser`` gains ``r`` times column ``winner``."""
        cols = list(self.cols)
        w = cols[winner - 1]
        cols[loser - 1] = tuple(a + r * b for a, b in zip(cols[loser - 1], w))
        return ExpansionMatrix(tuple(cols))

    def __matmul__(self, other: "ExpansionMatrix") -> "ExpansionMatrix":
        rows = self.rows()
        return ExpansionMatrix(
            tuple(tuple(sum(a * b for a, b in zip(r, c)) for r in rows) for c in other.cols)
        )

    def apply(self, y: Sequence) -> tuple:
        """``Q y`` in exact arithmetic if ``y`` is exact."""
        out = [0] * self.d
        for yj, c in zip(y, self.cols):
            if yj:
                for i, a in enumerate(c):
                    out[i] += a * yj
        return tuple(out)

    def column_norms(self) -> tuple[int, ...]:
        return tuple(sum(c) for c in self.cols)

    def is_positive(self) -> bool:
        return all(a > 0 for c in self.cols for a in c)

    def det(self) -> Fraction:
        return exact_det([list(r) for r in self.rows()])

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in r] for r in self.rows()])

    def __str__(self):
        return "\n".join(" ".join(f"{a:>4}" for a in r) for r in self.rows())


def exact_det(m: list[list]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = [[Fraction(x) for x in r] for r in m]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return det


def exact_solve(m: list[list], rhs: list) -> list[Fraction]:
    """Solve ``m x = rhs`` exactly; ``m`` square and nonsingular."""
    n = len(m)
    a = [[Fraction(x) for x in r] + [Fraction(b)] for r, b in zip(m, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[k], a[piv] = a[piv], a[k]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k] / a[k][k]
                for j in range(k, n + 1):
                    a[i][j] -= f * a[k][j]
    return [a[i][n] / a[i][i] for i in range(n)]
