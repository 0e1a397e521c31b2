"""Finite groups as multiplication tables, homomorphisms and low-degree cocycles.

Elements of every group are the integers ``0..n-1``.  Products are looked up
in ``mult``; ``mult[a, b]`` is ``a*b``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .report import CheckReport, PreconditionError, StructureError

MAX_ORDER = 4096
# exhaustive associativity check up to this many triples; sampled beyond
_ASSOC_EXHAUSTIVE = 60_000_000
_ASSOC_SAMPLES = 2_000_000


class FiniteGroup:
    """A finite group given by its Cayley table."""

    def __init__(self, mult, labels: Optional[Sequence[str]] = None, name: str = "", check: bool = True):
        mult = np.asarray(mult)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1] or mult.shape[0] == 0:
            raise StructureError(f"multiplication table must be square and nonempty, got shape {mult.shape}")
        n = mult.shape[0]
        if n > MAX_ORDER:
            raise StructureError(f"group order {n} exceeds the table limit {MAX_ORDER}")
        if mult.min() < 0 or mult.max() >= n:
            raise StructureError("multiplication table entries out of range")
        self.mult = mult.astype(np.int32)
        self.mult.setflags(write=False)
        self.name = name
        if labels is not None and len(labels) != n:
            raise StructureError("label list has the wrong length")
        self.labels = tuple(labels) if labels is not None else None

        idx = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(self.mult[e], idx) and np.array_equal(self.mult[:, e], idx)]
        if not ids:
            raise StructureError("table has no two-sided identity")
        self.identity = ids[0]
        rows, cols = np.nonzero(self.mult == self.identity)
        inv = np.full(n, -1, dtype=np.int64)
        inv[rows] = cols
        if (inv < 0).any() or not np.array_equal(self.mult[inv, idx], np.full(n, self.identity)):
            raise StructureError("some element has no two-sided inverse")
        self.inv = inv.astype(np.int32)
        self.inv.setflags(write=False)
        if check:
            bad = _associativity_witness(self.mult)
            if bad is not None:
                raise StructureError(f"table is not associative at {bad}")

    @property
    def size(self) -> int:
        return self.mult.shape[0]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or 'unnamed'}, order={self.size})"

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels is not None else str(a)

    def index(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)

    def mul(self, a, b):
        return self.mult[a, b]

    def product(self, elements: Iterable[int]) -> int:
        out = self.identity
        for e in elements:
            out = int(self.mult[out, e])
        return out

    def power(self, a: int, k: int) -> int:
        base = int(a) if k >= 0 else int(self.inv[a])
        out = self.identity
        for _ in range(abs(k)):
            out = int(self.mult[out, base])
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, int(a)
        while x != self.identity:
            x = int(self.mult[x, a])
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def is_subgroup(self, elements: Iterable[int]) -> bool:
        s = np.unique(np.fromiter(elements, dtype=np.int64))
        if s.size == 0 or self.identity not in s:
            return False
        return bool(np.isin(self.mult[np.ix_(s, s)], s).all())

    def is_normal(self, elements: Iterable[int]) -> bool:
        s = np.unique(np.fromiter(elements, dtype=np.int64))
        if not self.is_subgroup(s):
            return False
        g = np.arange(self.size)
        conj = self.mult[self.mult[self.inv[g][:, None], s[None, :]], g[:, None]]
        return bool(np.isin(conj, s).all())

    def subgroup(self, elements: Sequence[int], name: str = "") -> "FiniteGroup":
        """The subgroup on ``elements`` as a group in its own right, in the given order."""
        elements = [int(e) for e in elements]
        if not self.is_subgroup(elements):
            raise PreconditionError("elements do not form a subgroup")
        pos = {e: i for i, e in enumerate(elements)}
        table = [[pos[int(self.mult[a, b])] for b in elements] for a in elements]
        labels = [self.label(e) for e in elements]
        return FiniteGroup(table, labels=labels, name=name or f"sub({self.name})", check=False)

    def to_json(self) -> dict:
        out = {"size": self.size, "mult": self.mult.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "FiniteGroup":
        group = cls(data["mult"], labels=data.get("labels"))
        if int(data["size"]) != group.size:
            raise StructureError("declared size does not match the table")
        return group


def _associativity_witness(mult: np.ndarray):
    n = mult.shape[0]
    if n ** 3 <= _ASSOC_EXHAUSTIVE:
        c = np.arange(n)
        for a in range(n):
            ab = mult[a]  # (b,)
            lhs = mult[ab[:, None], c[None, :]]
            rhs = mult[a, mult]
            if not np.array_equal(lhs, rhs):
                b, cc = np.argwhere(lhs != rhs)[0]
                return (a, int(b), int(cc))
        return None
    rng = np.random.default_rng(0)
    a, b, c = rng.integers(0, n, size=(3, _ASSOC_SAMPLES))
    bad = np.flatnonzero(mult[mult[a, b], c] != mult[a, mult[b, c]])
    if bad.size:
        i = bad[0]
        return (int(a[i]), int(b[i]), int(c[i]))
    return None


# -- builders ---------------------------------------------------------------


def cyclic_group(m: int) -> FiniteGroup:
    if m < 1:
        raise PreconditionError("cyclic group order must be at least 1")
    i = np.arange(m)
    return FiniteGroup((i[:, None] + i[None, :]) % m, labels=[str(k) for k in range(m)], name=f"Z/{m}", check=False)


def _cycle_label(perm: tuple) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cyc, j = [], start
        while j not in seen:
            seen.add(j)
            cyc.append(j + 1)
            j = perm[j]
        cycles.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(cycles) or "()"


def symmetric_group(k: int) -> FiniteGroup:
    """S_k in lexicographic order of one-line notation.

    ``mult[p, q]`` is ``p∘q``: apply q first.
    """
    if not 1 <= k <= 6:
        raise PreconditionError("symmetric groups are supported for 1 <= k <= 6")
    perms = list(itertools.permutations(range(k)))
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms]
    return FiniteGroup(table, labels=[_cycle_label(p) for p in perms], name=f"S{k}", check=False)


def alternating_elements(k: int) -> list[int]:
    """Indices of the even permutations inside ``symmetric_group(k)``."""
    out = []
    for i, p in enumerate(itertools.permutations(range(k))):
        inversions = sum(1 for a in range(k) for b in range(a + 1, k) if p[a] > p[b])
        if inversions % 2 == 0:
            out.append(i)
    return out


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def sl2_group(p: int) -> FiniteGroup:
    """SL_2(F_p) for primes p <= 13, elements ordered by the entries (a, b, c, d)."""
    if not _is_prime(p) or p > 13:
        raise PreconditionError("SL2 tables are built for primes p <= 13")
    r = np.arange(p)
    a, b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    keep = (a * d - b * c) % p == 1
    a, b, c, d = a[keep], b[keep], c[keep], d[keep]
    n = a.size
    code = ((a * p + b) * p + c) * p + d
    lookup = np.full(p ** 4, -1, dtype=np.int64)
    lookup[code] = np.arange(n)
    A, B, C, D = a[:, None], b[:, None], c[:, None], d[:, None]
    E, F, G, H = a[None, :], b[None, :], c[None, :], d[None, :]
    prod = ((((A * E + B * G) % p * p + (A * F + B * H) % p) * p + (C * E + D * G) % p) * p + (C * F + D * H) % p)
    table = lookup[prod]
    labels = [f"[[{w},{x}],[{y},{z}]]" for w, x, y, z in zip(a, b, c, d)]
    return FiniteGroup(table, labels=labels, name=f"SL2(F{p})", check=False)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """G x H with element (x, y) stored at index ``x*|H| + y``."""
    n, m = g.size, h.size
    if n * m > MAX_ORDER:
        raise StructureError("direct product too large for a table")
    x, y = np.divmod(np.arange(n * m), m)
    table = g.mult[x[:, None], x[None, :]] * m + h.mult[y[:, None], y[None, :]]
    labels = [f"({g.label(i)},{h.label(j)})" for i, j in zip(x, y)]
    return FiniteGroup(table, labels=labels, name=f"{g.name}x{h.name}", check=False)


# -- homomorphisms ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    map: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.map, dtype=np.int32)
        if arr.shape != (self.source.size,):
            raise StructureError("homomorphism map has the wrong length")
        if arr.min() < 0 or arr.max() >= self.target.size:
            raise StructureError("homomorphism values out of range")
        object.__setattr__(self, "map", arr)

    def __call__(self, x):
        return self.map[x]

    def is_homomorphism(self) -> bool:
        s, t = self.source, self.target
        return bool(np.array_equal(self.map[s.mult], t.mult[self.map[:, None], self.map[None, :]]))

    def is_identity(self) -> bool:
        return self.source is self.target and bool(np.array_equal(self.map, np.arange(self.source.size)))


def identity_hom(g: FiniteGroup) -> GroupHom:
    return GroupHom(g, g, np.arange(g.size))


def inversion_map(g: FiniteGroup) -> GroupHom:
    """x -> x^{-1}; an automorphism exactly when g is abelian."""
    return GroupHom(g, g, g.inv.copy())


def conjugation_hom(g: FiniteGroup, h: int) -> GroupHom:
    """Inner automorphism x -> h^{-1} x h."""
    x = np.arange(g.size)
    return GroupHom(g, g, g.mult[g.mult[g.inv[h], x], h])


def power_hom(g: FiniteGroup, k: int) -> GroupHom:
    """x -> x^k, a homomorphism when g is abelian."""
    return GroupHom(g, g, np.array([g.power(x, k) for x in range(g.size)]))


def verify_involutive_automorphism(f: GroupHom) -> CheckReport:
    if f.source is not f.target and f.source.size != f.target.size:
        return CheckReport.fail("endomorphism", (f.source.size, f.target.size), "source and target differ")
    g = f.source
    m = f.map
    if np.unique(m).size != g.size:
        vals, first = np.unique(m, return_index=True)
        dup = next(i for i in range(g.size) if i not in set(first.tolist()))
        return CheckReport.fail("bijective", (dup,), "map is not injective")
    lhs = m[g.mult]
    rhs = g.mult[m[:, None], m[None, :]]
    if not np.array_equal(lhs, rhs):
        a, b = np.argwhere(lhs != rhs)[0]
        return CheckReport.fail("homomorphism", (int(a), int(b)), "f(ab) != f(a)f(b)")
    bad = np.flatnonzero(m[m] != np.arange(g.size))
    if bad.size:
        return CheckReport.fail("involutive", (int(bad[0]),), "f(f(x)) != x")
    return CheckReport.ok()


# -- coefficients and cocycles -----------------------------------------------


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z/m1 x ... x Z/mk with elements stored as residue vectors (last axis)."""

    torsion: tuple

    def __post_init__(self):
        t = tuple(int(m) for m in self.torsion)
        if not t or any(m < 1 for m in t):
            raise StructureError("moduli must be positive and the list nonempty")
        object.__setattr__(self, "torsion", t)

    @property
    def rank(self) -> int:
        return len(self.torsion)

    @property
    def size(self) -> int:
        return math.prod(self.torsion)

    @property
    def moduli(self) -> np.ndarray:
        return np.array(self.torsion, dtype=np.int64)

    @property
    def zero(self) -> tuple:
        return (0,) * self.rank

    @property
    def is_cyclic(self) -> bool:
        return self.rank == 1

    def reduce(self, values) -> np.ndarray:
        return np.mod(np.asarray(values, dtype=np.int64), self.moduli)

    def contains(self, values) -> bool:
        v = np.asarray(values)
        return v.shape[-1] == self.rank and bool(((v >= 0) & (v < self.moduli)).all())

    def elements(self) -> list[tuple]:
        return list(itertools.product(*(range(m) for m in self.torsion)))

    def encode(self, values) -> np.ndarray:
        """Mixed-radix integer code of each residue vector."""
        v = np.asarray(values, dtype=np.int64)
        code = np.zeros(v.shape[:-1], dtype=np.int64)
        for j, m in enumerate(self.torsion):
            code = code * m + v[..., j]
        return code

    def decode(self, codes) -> np.ndarray:
        c = np.asarray(codes, dtype=np.int64)
        out = np.empty(c.shape + (self.rank,), dtype=np.int64)
        for j in range(self.rank - 1, -1, -1):
            c, out[..., j] = np.divmod(c, self.torsion[j])
        return out


def cyclic_coefficients(m: int) -> FiniteAbelianGroup:
    return FiniteAbelianGroup((m,))


@dataclass(frozen=True, eq=False)
class Group1Cocycle:
    """A map N -> A; with trivial action the cocycle law is additivity."""

    group: FiniteGroup
    coeff: FiniteAbelianGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape != (self.group.size, self.coeff.rank):
            raise StructureError("1-cocycle value array has the wrong shape")
        object.__setattr__(self, "values", self.coeff.reduce(v))


@dataclass(frozen=True, eq=False)
class Group2Cocycle:
    group: FiniteGroup
    coeff: FiniteAbelianGroup
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        n = self.group.size
        if t.ndim == 2:
            t = t[:, :, None]
        if t.shape != (n, n, self.coeff.rank):
            raise StructureError("2-cocycle table has the wrong shape")
        object.__setattr__(self, "table", self.coeff.reduce(t))


def verify_group_1cocycle(lam: Group1Cocycle) -> CheckReport:
    g, v = lam.group, lam.values
    lhs = v[g.mult]
    rhs = lam.coeff.reduce(v[:, None, :] + v[None, :, :])
    bad = np.argwhere((lhs != rhs).any(-1))
    if bad.size:
        x, y = bad[0]
        return CheckReport.fail("additive", (int(x), int(y)), "lambda(xy) != lambda(x) + lambda(y)")
    return CheckReport.ok()


def verify_group_2cocycle(theta: Group2Cocycle) -> CheckReport:
    g, t, A = theta.group, theta.table, theta.coeff
    e = g.identity
    bad = np.flatnonzero(t[e].any(-1))
    if bad.size:
        return CheckReport.fail("normalized", (e, int(bad[0])), "theta(1, x) != 0")
    bad = np.flatnonzero(t[:, e].any(-1))
    if bad.size:
        return CheckReport.fail("normalized", (int(bad[0]), e), "theta(x, 1) != 0")
    n = g.size
    y = np.arange(n)[:, None]
    z = np.arange(n)[None, :]
    yz = g.mult
    for x in range(n):
        val = t[x, y] - t[x, yz] + t[g.mult[x, y], z] - t[y, z]
        bad = np.argwhere(A.reduce(val).any(-1))
        if bad.size:
            b, c = bad[0]
            return CheckReport.fail("cocycle", (x, int(b), int(c)),
                                    "theta(x,y) - theta(x,yz) + theta(xy,z) - theta(y,z) != 0")
    return CheckReport.ok()


def central_extension(k: FiniteGroup, theta: Group2Cocycle) -> FiniteGroup:
    """K x A with (x,a)(y,b) = (xy, a+b+theta(x,y)); element (x, a) at ``x*|A| + code(a)``."""
    if theta.group is not k:
        raise PreconditionError("cocycle is defined on a different group")
    report = verify_group_2cocycle(theta)
    if not report:
        raise PreconditionError(f"not a normalized 2-cocycle: {report.detail}", report.counterexample)
    A = theta.coeff
    na = A.size
    if k.size * na > MAX_ORDER:
        raise StructureError("extension too large for a table")
    elems = A.decode(np.arange(na))
    x, a = np.divmod(np.arange(k.size * na), na)
    va = elems[a]
    xy = k.mult[x[:, None], x[None, :]]
    fiber = A.reduce(va[:, None, :] + va[None, :, :] + theta.table[x[:, None], x[None, :]])
    table = xy * na + A.encode(fiber)
    labels = [f"({k.label(i)},{','.join(map(str, elems[j]))})" for i, j in zip(x, a)]
    return FiniteGroup(table, labels=labels, name=f"{k.name}~{A.torsion}")


def theta_prime(p: int, eps: int = 1) -> Group2Cocycle:
    """((x + eps*y)^p - x^p - (eps*y)^p) / p mod p on Z/p, from integer lifts in 0..p-1."""
    if not _is_prime(p) or p == 2:
        raise PreconditionError("p must be an odd prime")
    if eps not in (1, -1):
        raise PreconditionError("eps must be +1 or -1")
    table = [[((x + eps * y) ** p - x ** p - (eps * y) ** p) // p % p for y in range(p)] for x in range(p)]
    return Group2Cocycle(cyclic_group(p), cyclic_coefficients(p), np.array(table))


def theta_prime_sum(p: int, eps: int = 1) -> np.ndarray:
    """The truncated sum of j^{-1} x^j (eps*y)^{p-j} over 1 <= j < p, mod p.

    Differs from :func:`theta_prime` by the signs (-1)^(j-1); kept only for comparison.
    """
    if not _is_prime(p) or p == 2:
        raise PreconditionError("p must be an odd prime")
    out = np.zeros((p, p), dtype=np.int64)
    for x in range(p):
        for y in range(p):
            out[x, y] = sum(pow(j, -1, p) * pow(x, j, p) * pow(eps * y, p - j, p) for j in range(1, p)) % p
    return out


build_cyclic = cyclic_group
build_symmetric = symmetric_group
build_sl2p = sl2_group
