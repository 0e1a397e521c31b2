"""Smith normal form over the integers and abelian Hom counting."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .groups import FiniteGroup
from .report import PreconditionError


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> tuple:
    """Elementary divisors d1 | d2 | ... of an integer matrix.

    Only the nonzero-rank part plus explicit zeros for square rank-deficient
    input is returned: for an m x k matrix the result has min(m, k) entries,
    zero entries marking free summands of the cokernel.
    """
    m = [[int(v) for v in row] for row in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if any(len(r) != cols for r in m):
        raise ValueError("ragged matrix")
    t = 0
    while t < min(rows, cols):
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if m[i][j] and (pivot is None or abs(m[i][j]) < abs(m[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        i, j = pivot
        m[t], m[i] = m[i], m[t]
        for r in m:
            r[t], r[j] = r[j], r[t]
        done = False
        while not done:
            done = True
            p = m[t][t]
            for i in range(t + 1, rows):
                q = m[i][t] // p
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[t])]
                if m[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = m[t][j] // p
                if q:
                    for r in m:
                        r[j] -= q * r[t]
                if m[t][j]:
                    done = False
            if not done:
                # move the smallest remaining entry of row/column t into the pivot
                best = (abs(p), t, t)
                for i in range(t + 1, rows):
                    if m[i][t] and abs(m[i][t]) < best[0]:
                        best = (abs(m[i][t]), i, t)
                for j in range(t + 1, cols):
                    if m[t][j] and abs(m[t][j]) < best[0]:
                        best = (abs(m[t][j]), t, j)
                _, i, j = best
                if i != t:
                    m[t], m[i] = m[i], m[t]
                if j != t:
                    for r in m:
                        r[t], r[j] = r[j], r[t]
                continue
            # divisibility: fold in any entry not divisible by the pivot
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if m[i][j] % p), None)
            if bad is not None:
                m[t] = [a + b for a, b in zip(m[t], m[bad[0]])]
                done = False
        t += 1
    diag = [abs(m[i][i]) for i in range(min(rows, cols))]
    nonzero = sorted(d for d in diag if d)
    return tuple(nonzero + [0] * (len(diag) - len(nonzero)))


def hom_count_abelian(divisors: Sequence[int], group: FiniteGroup) -> int:
    """Number of homomorphisms from the direct sum of Z/d_i into an abelian group.

    A divisor of 0 stands for a free summand Z and contributes |group|.
    """
    if not group.is_abelian():
        raise PreconditionError("hom counting needs an abelian target group")
    orders = np.array([group.element_order(x) for x in range(group.size)])
    total = 1
    for d in divisors:
        d = abs(int(d))
        if d == 0:
            total *= group.size
        else:
            total *= int(np.count_nonzero(d % orders == 0))
    return total


def cyclic_hom_count(d: int, m: int) -> int:
    """|Hom(Z/d, Z/m)| = gcd(d, m), with d = 0 meaning Z."""
    return m if d == 0 else math.gcd(d, m)
