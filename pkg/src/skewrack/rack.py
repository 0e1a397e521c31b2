"""Finite skew-racks as operation tables, their axioms, Ann-sets and Inn^even."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .report import CheckReport, InnEvenOverflow, PreconditionError, StructureError

# elementwise work per numpy batch
_BATCH = 1 << 20


def index_dtype(n: int):
    return np.int16 if n <= np.iinfo(np.int16).max else np.int32


def _as_perm(values, n: int, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (n,):
        raise StructureError(f"{what} must have length {n}, got shape {arr.shape}")
    if n and (arr.min() < 0 or arr.max() >= n):
        raise StructureError(f"{what} entries out of range")
    if np.unique(arr).size != n:
        raise StructureError(f"{what} is not a permutation")
    return arr.astype(index_dtype(n))


class SkewRackBase:
    """Shared interface: ``size``, ``kappa``, ``rho`` and vectorized ``apply``/``apply_inv``."""

    size: int
    kappa: np.ndarray
    rho: Optional[np.ndarray]
    name: str

    def apply(self, a, b):
        raise NotImplementedError

    def apply_inv(self, a, b):
        raise NotImplementedError

    def apply_eps(self, a, b, eps: int):
        return self.apply(a, b) if eps > 0 else self.apply_inv(a, b)

    def kappa_pow(self, k: int) -> np.ndarray:
        return self.kappa if k % 2 else np.arange(self.size, dtype=self.kappa.dtype)

    @property
    def kappa_involutive(self) -> bool:
        return bool(np.array_equal(self.kappa[self.kappa], np.arange(self.size)))

    @property
    def twist(self) -> np.ndarray:
        """Tw(x) = kappa(x) ◁^{-1} kappa(x)."""
        if self._twist is None:
            k = self.kappa
            self._twist = np.asarray(self.apply_inv(k, k)).astype(index_dtype(self.size))
        return self._twist

    @property
    def twist_inv(self) -> np.ndarray:
        """x -> kappa(x) ◁ x, the inverse of Tw."""
        if self._twist_inv is None:
            x = np.arange(self.size)
            self._twist_inv = np.asarray(self.apply(self.kappa, x)).astype(index_dtype(self.size))
        return self._twist_inv

    def __len__(self) -> int:
        return self.size


class FiniteSkewRack(SkewRackBase):
    """A skew-rack stored as dense tables.

    ``op[a, b]`` is a◁b.  ``op_inv`` is derived column by column; it is
    ``None`` when some column of ``op`` is not a bijection, in which case
    :func:`verify_skew_rack` reports the SR2 failure.
    """

    def __init__(self, op, kappa, rho=None, name: str = "", op_inv=None):
        op = np.asarray(op)
        if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] == 0:
            raise StructureError(f"operation table must be square and nonempty, got shape {op.shape}")
        n = op.shape[0]
        if op.min() < 0 or op.max() >= n:
            raise StructureError("operation table entries out of range")
        dt = index_dtype(n)
        self.size = n
        self.name = name
        self.op = np.ascontiguousarray(op, dtype=dt)
        self.kappa = _as_perm(kappa, n, "kappa")
        self.rho = None if rho is None else _as_perm(rho, n, "rho")
        if op_inv is not None:
            op_inv = np.asarray(op_inv)
            if op_inv.shape != (n, n):
                raise StructureError("op_inv has the wrong shape")
            self.op_inv = np.ascontiguousarray(op_inv, dtype=dt)
            rows = np.arange(n)[:, None]
            cols = np.arange(n)[None, :]
            if not np.array_equal(self.op[self.op_inv, cols], np.broadcast_to(rows, (n, n))):
                raise StructureError("op_inv is not the columnwise inverse of op")
        else:
            self.op_inv = _column_inverse(self.op)
        for arr in (self.op, self.kappa, self.rho, self.op_inv):
            if arr is not None:
                arr.setflags(write=False)
        self._twist = None
        self._twist_inv = None

    def __repr__(self) -> str:
        return f"FiniteSkewRack({self.name or 'unnamed'}, size={self.size})"

    @property
    def columns_bijective(self) -> bool:
        return self.op_inv is not None

    def apply(self, a, b):
        return self.op[a, b]

    def apply_inv(self, a, b):
        if self.op_inv is None:
            raise PreconditionError("operation columns are not bijective")
        return self.op_inv[a, b]

    def with_rho(self, rho) -> "FiniteSkewRack":
        return FiniteSkewRack(self.op, self.kappa, rho=rho, name=self.name, op_inv=self.op_inv)

    def to_json(self) -> dict:
        out = {"size": self.size, "op": self.op.tolist(), "kappa": self.kappa.tolist()}
        if self.rho is not None:
            out["rho"] = self.rho.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "FiniteSkewRack":
        try:
            rack = cls(data["op"], data["kappa"], rho=data.get("rho"))
        except KeyError as exc:
            raise StructureError(f"rack JSON is missing {exc}") from None
        if int(data.get("size", rack.size)) != rack.size:
            raise StructureError("declared size does not match the table")
        return rack

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "FiniteSkewRack":
        return cls.from_json(json.loads(text))


def _column_inverse(op: np.ndarray) -> Optional[np.ndarray]:
    n = op.shape[0]
    inv = np.full((n, n), -1, dtype=np.int64)
    rows = np.broadcast_to(np.arange(n)[:, None], (n, n))
    cols = np.broadcast_to(np.arange(n)[None, :], (n, n))
    inv[op, cols] = rows
    if (inv < 0).any():
        return None
    return inv.astype(op.dtype)


class PairRack(SkewRackBase):
    """The rack (x,a)◁(y,b) = (f(x) y^{-1} b y, f(a)) on K x K without dense tables.

    Element (x, a) has index ``x*|K| + a``.  Used where |K|^4 table entries
    would not fit in memory.
    """

    def __init__(self, group, f_map, name: str = ""):
        k = group.size
        self.group = group
        self.k = k
        self.size = k * k
        self.name = name
        f = np.asarray(f_map, dtype=np.int64)
        self.f = f
        mult = group.mult.astype(np.int64)
        self._mult = mult
        inv = group.inv.astype(np.int64)
        y = np.arange(k)
        # conj[y, b] = y^{-1} b y
        self._conj = mult[mult[inv[y][:, None], y[None, :]], y[:, None]]
        finv = np.empty(k, dtype=np.int64)
        finv[f] = np.arange(k)
        self._finv = finv
        self._inv = inv
        x, a = np.divmod(np.arange(self.size), k)
        dt = index_dtype(self.size)
        self.kappa = (f[x] * k + f[a]).astype(dt)
        self.rho = (f[x] * k + inv[f[a]]).astype(dt)
        self._twist = None
        self._twist_inv = None

    def __repr__(self) -> str:
        return f"PairRack({self.name or 'unnamed'}, size={self.size})"

    columns_bijective = True

    def apply(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        x, u = np.divmod(a, self.k)
        y, v = np.divmod(b, self.k)
        return self._mult[self.f[x], self._conj[y, v]] * self.k + self.f[u]

    def apply_inv(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        z, c = np.divmod(a, self.k)
        y, v = np.divmod(b, self.k)
        x = self._finv[self._mult[z, self._inv[self._conj[y, v]]]]
        return x * self.k + self._finv[c]


# -- axioms -----------------------------------------------------------------


def _require_dense(rack) -> FiniteSkewRack:
    if not isinstance(rack, FiniteSkewRack):
        raise PreconditionError("exhaustive verification needs a dense FiniteSkewRack")
    return rack


def verify_skew_rack(rack: FiniteSkewRack) -> CheckReport:
    """Check SR1, SR2, SR3 exhaustively; the lowest failing tuple is reported."""
    X = _require_dense(rack)
    op, k, n = X.op, X.kappa, X.size
    lhs = k[op]
    rhs = op[k[:, None], k[None, :]]
    if not np.array_equal(lhs, rhs):
        a, b = np.argwhere(lhs != rhs)[0]
        return CheckReport.fail("SR1", (int(a), int(b)), "kappa(a◁b) != kappa(a)◁kappa(b)")
    if not X.columns_bijective:
        for b in range(n):
            col = op[:, b]
            vals, counts = np.unique(col, return_counts=True)
            if vals.size != n:
                dup = vals[counts > 1][0]
                a1, a2 = np.flatnonzero(col == dup)[:2]
                return CheckReport.fail("SR2", (int(a1), int(a2), b), "a ↦ a◁b is not injective")
    for a in range(n):
        row = op[a]
        left = op[row[:, None], np.arange(n)[None, :]]  # (a◁b)◁c over (b, c)
        right = op[op[a, k][None, :], op]  # (a◁κc)◁(b◁c)
        if not np.array_equal(left, right):
            b, c = np.argwhere(left != right)[0]
            return CheckReport.fail("SR3", (a, int(b), int(c)), "(a◁b)◁c != (a◁κc)◁(b◁c)")
    return CheckReport.ok()


def verify_good_involution(rack: FiniteSkewRack) -> CheckReport:
    X = _require_dense(rack)
    if X.rho is None:
        raise StructureError("rack has no involution rho")
    op, k, r, n = X.op, X.kappa, X.rho, X.size
    idx = np.arange(n)
    lhs = op[op, r[None, :]]
    bad = np.argwhere(lhs != idx[:, None])
    if bad.size:
        a, b = bad[0]
        return CheckReport.fail("SS1a", (int(a), int(b)), "(a◁b)◁rho(b) != a")
    lhs = op[r[:, None], k[None, :]]
    rhs = r[op]
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        a, b = bad[0]
        return CheckReport.fail("SS1b", (int(a), int(b)), "rho(a)◁kappa(b) != rho(a◁b)")
    bad = np.flatnonzero(r[r] != idx)
    if bad.size:
        return CheckReport.fail("SS2-rho", (int(bad[0]),), "rho(rho(x)) != x")
    bad = np.flatnonzero(k[k] != idx)
    if bad.size:
        return CheckReport.fail("SS2-kappa", (int(bad[0]),), "kappa(kappa(x)) != x")
    bad = np.flatnonzero(r[k] != k[r])
    if bad.size:
        return CheckReport.fail("SS2-commute", (int(bad[0]),), "rho(kappa(x)) != kappa(rho(x))")
    return CheckReport.ok()


def tw_map(rack) -> np.ndarray:
    """The permutation x ↦ kappa(x) ◁^{-1} kappa(x), checked against its inverse."""
    if not rack.kappa_involutive:
        raise PreconditionError("Tw needs kappa to be an involution")
    tw = rack.twist
    back = rack.twist_inv
    n = rack.size
    if not (np.array_equal(back[tw], np.arange(n)) and np.array_equal(tw[back], np.arange(n))):
        raise StructureError("x ↦ kappa(x)◁x does not invert Tw")
    return tw.copy()


def apply_sequence(rack, a_seq: Sequence[int], x):
    """((x◁a1)◁a2)...◁an; works elementwise on arrays of x."""
    out = x
    for a in a_seq:
        out = rack.apply(out, a)
    return out


def ann(rack) -> np.ndarray:
    """Sorted indices of Ann(X) = {x : x◁kappa(x) = kappa(x)}."""
    x = np.arange(rack.size)
    k = rack.kappa
    return np.flatnonzero(np.asarray(rack.apply(x, k)) == k)


def ann_eps(rack, a_seq: Sequence[int], eps: int) -> np.ndarray:
    if eps not in (1, -1):
        raise PreconditionError("eps must be +1 or -1")
    if not rack.kappa_involutive:
        raise PreconditionError("Ann^eps needs kappa to be an involution")
    return np.flatnonzero(_ann_eps_masks(rack, np.asarray(a_seq, dtype=np.int64)[None, :], eps)[0])


def _seq_images(rack, seqs: np.ndarray) -> np.ndarray:
    """A_seq(x) for a batch of sequences: shape (B, n_elements)."""
    B = seqs.shape[0]
    out = np.broadcast_to(np.arange(rack.size), (B, rack.size))
    for j in range(seqs.shape[1]):
        out = np.asarray(rack.apply(out, seqs[:, j][:, None]))
    return out


def _ann_eps_masks(rack, seqs: np.ndarray, eps: int, images=None) -> np.ndarray:
    n = seqs.shape[1]
    A = _seq_images(rack, seqs) if images is None else images
    kx = rack.kappa_pow(n + 1)[None, :]
    kx = np.broadcast_to(kx, A.shape)
    if eps == 1:
        return np.asarray(rack.apply(A, kx)) == kx
    return np.asarray(rack.apply(kx, rack.kappa[A])) == A


def _sequence_batches(size: int, n: int, budget: int, rng, batch_rows: int):
    """Yield (B, n) arrays of sequences: all of X^n if affordable, else a sample."""
    if n == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    total = size ** n
    if total <= budget:
        start = 0
        while start < total:
            codes = np.arange(start, min(total, start + batch_rows), dtype=np.int64)
            cols = []
            for _ in range(n):
                codes, r = np.divmod(codes, size)
                cols.append(r)
            yield np.stack(cols[::-1], axis=1)
            start += batch_rows
    else:
        remaining = budget
        while remaining > 0:
            b = min(batch_rows, remaining)
            yield rng.integers(0, size, size=(b, n))
            remaining -= b


def check_property_fr(rack, n_max: int = 2, budget: int = 200_000, seed: int = 0) -> CheckReport:
    """Check FR1 and FR2 for every sequence of length 0..n_max.

    Sequences of length n are enumerated exhaustively when |X|^n <= budget and
    sampled uniformly (``budget`` of them, seeded) otherwise.  Counterexamples
    are ``(n, a_1..a_n, x_or_y, i)`` with the axiom naming the failing clause.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if not rack.kappa_involutive:
        raise PreconditionError("Property FR needs kappa to be an involution")
    n_el = rack.size
    base = ann(rack)
    if base.size == 0:
        return CheckReport.fail("FR1-empty", (), "Ann(X) is empty")
    m = base.size
    rng = np.random.default_rng(seed)
    sampled = []
    x_all = np.arange(n_el)
    for n in range(n_max + 1):
        rows = max(1, _BATCH // max(1, n_el))
        if n > 0 and n_el ** n > budget:
            sampled.append(n)
        for seqs in _sequence_batches(n_el, n, budget, rng, rows):
            A = _seq_images(rack, seqs)
            plus = _ann_eps_masks(rack, seqs, 1, A)
            minus = _ann_eps_masks(rack, seqs, -1, A)
            for mask, label in ((plus, "FR1+"), (minus, "FR1-")):
                sizes = mask.sum(axis=1)
                bad = np.flatnonzero(sizes != m)
                if bad.size:
                    s = bad[0]
                    return CheckReport.fail(label, (n, *map(int, seqs[s])),
                                            f"|Ann^eps| = {int(sizes[s])} but |Ann| = {m}")
            for i in range(1, n + 1):
                ai = seqs[:, i - 1][:, None]
                target = rack.kappa_pow(n + i)[ai]
                # FR2a: kappa^{n+i}(a_i) = A(kappa^{i+1}(a_i) ◁ x) for x in Ann^{+1}
                start = np.asarray(rack.apply(rack.kappa_pow(i + 1)[ai], x_all[None, :]))
                lhs = apply_rows(rack, seqs, start)
                bad = np.argwhere(plus & (lhs != target))
                if bad.size:
                    s, x = bad[0]
                    return CheckReport.fail("FR2a", (n, *map(int, seqs[s]), int(x), i),
                                            "kappa^{n+i}(a_i) != A(kappa^{i+1}(a_i)◁x)")
                # FR2b: kappa^{n+i}(a_i)◁kappa^{n+1}(y) = A_{a_j◁kappa^j(y)}(kappa^{i+1}(a_i))
                ky = np.broadcast_to(rack.kappa_pow(n + 1)[None, :], (seqs.shape[0], n_el))
                lhs = np.asarray(rack.apply(np.broadcast_to(target, ky.shape), ky))
                rhs = np.broadcast_to(rack.kappa_pow(i + 1)[ai], ky.shape)
                for j in range(1, n + 1):
                    shifted = np.asarray(rack.apply(seqs[:, j - 1][:, None], rack.kappa_pow(j)[None, :]))
                    rhs = np.asarray(rack.apply(rhs, shifted))
                bad = np.argwhere(minus & (lhs != rhs))
                if bad.size:
                    s, y = bad[0]
                    return CheckReport.fail("FR2b", (n, *map(int, seqs[s]), int(y), i),
                                            "kappa^{n+i}(a_i)◁kappa^{n+1}(y) != A_{a_j◁kappa^j(y)}(kappa^{i+1}(a_i))")
    detail = f"|Ann| = {m}; depth {n_max}"
    if sampled:
        detail += f"; sampled at lengths {sampled}"
    return CheckReport.ok(detail)


def apply_rows(rack, seqs: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Row s of ``start`` pushed through the sequence seqs[s]."""
    out = start
    for j in range(seqs.shape[1]):
        out = np.asarray(rack.apply(out, seqs[:, j][:, None]))
    return out


# -- Inn^even ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InnEvenGroup:
    """The permutation group generated by x ↦ κ(x)◁a and the two-step maps."""

    base: object
    generators: tuple
    elements: frozenset

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.order

    def act(self, x: int, g: tuple) -> int:
        return g[x]


def inn_even_generators(rack) -> list[np.ndarray]:
    """A generating set of Inn^even.

    The two-step maps R_b^{e2} R_a^{e1} generate the even-length words in the
    right translations R_a; with a fixed a0 those are generated by
    R_a R_{a0}^{-1}, R_{a0}^{-1} R_a and R_{a0}^2.
    """
    n = rack.size
    x = np.arange(n)
    gens = []
    for a in range(n):
        gens.append(np.asarray(rack.apply(rack.kappa, a)))
    a0 = 0
    r0 = np.asarray(rack.apply(x, a0))
    r0_inv = np.asarray(rack.apply_inv(x, a0))
    gens.append(r0[r0])
    for a in range(n):
        ra = np.asarray(rack.apply(x, a))
        gens.append(r0_inv[ra])  # x ↦ (x◁a)◁^{-1}a0
        gens.append(ra[r0_inv])  # x ↦ (x◁^{-1}a0)◁a
    out, seen = [], set()
    ident = x.tobytes()
    for g in gens:
        g = g.astype(np.int64)
        key = g.tobytes()
        if key != ident and key not in seen:
            seen.add(key)
            out.append(g)
    return out


def inn_even(rack, cap: int = 100_000) -> InnEvenGroup:
    """Breadth-first closure of the generators; raises InnEvenOverflow past ``cap``."""
    gens = inn_even_generators(rack)
    n = rack.size
    ident = tuple(range(n))
    seen = {ident}
    queue = deque([np.arange(n)])
    while queue:
        g = queue.popleft()
        for h in gens:
            gh = h[g]  # apply g, then h
            key = tuple(gh.tolist())
            if key not in seen:
                seen.add(key)
                if len(seen) > cap:
                    raise InnEvenOverflow(cap, len(seen))
                queue.append(gh)
    return InnEvenGroup(rack, tuple(tuple(g.tolist()) for g in gens), frozenset(seen))


def inn_even_orbits(rack) -> tuple[np.ndarray, list[np.ndarray], list[tuple[int, ...]]]:
    """Orbit labels under Inn^even, plus the generators used.

    Returns ``(label, gens, words)``: ``label[x]`` is the orbit id and
    ``words[x]`` a generator word taking the orbit's least element to x.
    """
    gens = inn_even_generators(rack)
    n = rack.size
    label = np.full(n, -1, dtype=np.int64)
    words: list = [None] * n
    for root in range(n):
        if label[root] >= 0:
            continue
        label[root] = root
        words[root] = ()
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for gi, g in enumerate(gens):
                y = int(g[x])
                if label[y] < 0:
                    label[y] = root
                    words[y] = words[x] + (gi,)
                    queue.append(y)
    return label, gens, words


def orbit_pairs(rack):
    """All pairs (x, x·g) for g in Inn^even, as two index arrays."""
    label, gens, words = inn_even_orbits(rack)
    xs, ys = [], []
    for root in np.unique(label):
        members = np.flatnonzero(label == root)
        xs.append(np.repeat(members, members.size))
        ys.append(np.tile(members, members.size))
    return np.concatenate(xs), np.concatenate(ys), gens, words


def check_f_link_homotopic(rack, cap: int = 100_000) -> CheckReport:
    """x◁^e κ(x) = x◁^e (x·g) for all x, all g in Inn^even and e = ±1.

    Only the orbit of x under Inn^even matters, so the check runs over orbit
    pairs rather than group elements.  ``cap`` bounds the number of pairs.
    The counterexample is ``(x, x·g, e)``; the detail names a generator word for g.
    """
    if not rack.kappa_involutive:
        raise PreconditionError("f-link homotopy needs kappa to be an involution")
    label, gens, words = inn_even_orbits(rack)
    sizes = np.bincount(label, minlength=rack.size)
    pairs = int((sizes.astype(np.int64) ** 2).sum())
    if pairs > cap * rack.size:
        raise InnEvenOverflow(cap * rack.size, pairs)
    k = rack.kappa
    for x in range(rack.size):
        members = np.flatnonzero(label == label[x])
        for eps in (1, -1):
            want = rack.apply_eps(x, k[x], eps)
            got = np.asarray(rack.apply_eps(np.full(members.size, x), members, eps))
            bad = np.flatnonzero(got != want)
            if bad.size:
                y = int(members[bad[0]])
                word = _word_between(words, x, y)
                return CheckReport.fail("f-link", (x, y, eps),
                                        f"x◁^e kappa(x) != x◁^e (x·g); g = generator word {word}")
    return CheckReport.ok(f"{np.unique(label).size} orbits under Inn^even")


def _word_between(words, x: int, y: int) -> str:
    # x = root·w_x, y = root·w_y, so g = w_x^{-1} w_y
    return f"inverse{list(words[x])} then {list(words[y])}"


def load_rack(path: str) -> FiniteSkewRack:
    with open(path) as fh:
        return FiniteSkewRack.from_json(json.load(fh))
