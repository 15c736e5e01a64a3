"""Exact integer and rational linear algebra on small dense matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import Digraph, GraphError, IntegerMatrix, reduced_laplacian

EXACT_RESISTANCE_LIMIT = 400


class SingularMatrixError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GroupStructure:
    order: int
    invariant_factors: tuple[int, ...]

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "trivial group"
        return " x ".join(f"Z/{d}" for d in self.invariant_factors)


def _rows(M) -> list[list[int]]:
    if isinstance(M, IntegerMatrix):
        return M.tolist()
    rows = [[int(x) for x in r] for r in M]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix must be square")
    return rows


def determinant(M: IntegerMatrix | Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss elimination; every intermediate division is exact."""
    a = _rows(M)
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * pivot - aik * rk[j]) // prev
            ri[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def smith_normal_form(M: IntegerMatrix | Sequence[Sequence[int]]) -> GroupStructure:
    """Invariant factors of the cokernel Z^n / Z^n M for nonsingular M.

    Row/column gcd reduction, always pivoting on the smallest nonzero entry
    left in the trailing block to keep coefficients small.
    """
    a = _rows(M)
    n = len(a)
    diag: list[int] = []
    for k in range(n):
        while True:
            best = None
            for i in range(k, n):
                for j in range(k, n):
                    x = a[i][j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
                        if best[0] == 1:
                            break
                if best and best[0] == 1:
                    break
            if best is None:
                raise SingularMatrixError("matrix is singular")
            _, pi, pj = best
            a[k], a[pi] = a[pi], a[k]
            for r in a:
                r[k], r[pj] = r[pj], r[k]
            p = a[k][k]
            dirty = False
            for i in range(k + 1, n):
                q = a[i][k] // p
                if q:
                    ri, rk = a[i], a[k]
                    for j in range(k, n):
                        ri[j] -= q * rk[j]
                if a[i][k]:
                    dirty = True
            for j in range(k + 1, n):
                q = a[k][j] // p
                if q:
                    for r in a[k:]:
                        r[j] -= q * r[k]
                if a[k][j]:
                    dirty = True
            if dirty:
                continue
            bad = next((i for i in range(k + 1, n) if any(a[i][j] % p for j in range(k + 1, n))), None)
            if bad is None:
                break
            rk, rb = a[k], a[bad]
            for j in range(k, n):
                rk[j] += rb[j]
        diag.append(abs(a[k][k]))
    order = 1
    for d in diag:
        order *= d
    return GroupStructure(order, tuple(d for d in diag if d != 1))


def solve_rational(M: IntegerMatrix | Sequence[Sequence[int]], b: Sequence) -> list[Fraction]:
    """Exact solution of M x = b by Gaussian elimination over the rationals."""
    return solve_rational_many(M, [b])[0]


def solve_rational_many(M, rhs: Sequence[Sequence]) -> list[list[Fraction]]:
    a = _rows(M)
    n = len(a)
    k = len(rhs)
    aug = [[Fraction(x) for x in a[i]] + [Fraction(r[i]) for r in rhs] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        rc = aug[c]
        inv = 1 / rc[c]
        for j in range(c, n + k):
            rc[j] *= inv
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                ri = aug[i]
                for j in range(c, n + k):
                    if rc[j]:
                        ri[j] -= f * rc[j]
    return [[aug[i][n + r] for i in range(n)] for r in range(k)]


def _require_bidirected_with_sink(G: Digraph) -> int:
    cls = G.classification
    if G.sink is None or not cls.has_global_sink or not cls.bidirected_with_sink:
        raise GraphError("effective resistance needs a connected bidirected graph with sink")
    return G.sink


def resistances(G: Digraph) -> dict[int, Fraction | float]:
    """Effective resistance from every non-sink vertex to the sink.

    Each pair of opposite edges is a unit resistor; grounding at the sink gives
    the reduced Laplacian, whose inverse diagonal holds the resistances.  Above
    EXACT_RESISTANCE_LIMIT vertices a float solve is used and its residual
    added so the values stay upper bounds.
    """
    _require_bidirected_with_sink(G)
    lap = reduced_laplacian(G)
    labels = lap.labels
    n = len(labels)
    if n <= EXACT_RESISTANCE_LIMIT:
        cols = solve_rational_many(lap, [[1 if i == j else 0 for i in range(n)] for j in range(n)])
        return {labels[j]: cols[j][j] for j in range(n)}
    A = np.array(lap.rows, dtype=float)
    X = np.linalg.solve(A, np.eye(n))
    resid = float(np.abs(A @ X - np.eye(n)).max())
    if resid > 1e-9:
        raise ArithmeticError(f"float resistance solve residual {resid:.3g} exceeds 1e-9")
    return {labels[j]: float(X[j, j]) + resid for j in range(n)}


def effective_resistance(G: Digraph, v: int) -> Fraction | float:
    if v == G.sink:
        return Fraction(0)
    return resistances(G)[v]


def max_resistance(G: Digraph) -> Fraction | float:
    values = resistances(G).values()
    return max(values, default=Fraction(0))
