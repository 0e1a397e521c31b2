"""X-colorings of framed closed braids.

Crossing rule, reading top to bottom with inputs (u, v) at positions (i, i+1):

* positive letter: (u, v) -> (kappa(v), u◁v), weight +phi(u, v);
* negative letter: (u, v) -> (v◁^{-1}kappa(u), kappa(u)), weight -phi(out_left, out_right).

A coloring is a top tuple fixed by the whole word.

The solver first removes every position touched by a single crossing (the
strands added by stabilizations): the closure equation on that position
determines its color from the neighbour's, so the crossing becomes a map on
one position.  Positions are then split into groups that never meet at a
crossing; each group is swept in word order, branching a position's top color
at its first use and filtering on the closure equation after its last use.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .braid import FramedBraid
from .rack import ann
from .report import BudgetExceeded, CheckReport, PreconditionError

CHUNK = 1 << 21
DEFAULT_BUDGET = 10 ** 10


def slice_apply(rack, sign: int, left, right):
    """Colors leaving a crossing, given the colors entering at its left and right."""
    if sign > 0:
        return rack.kappa[right], rack.apply(left, right)
    return rack.apply_inv(right, rack.kappa[left]), rack.kappa[left]


def propagate(rack, b: FramedBraid, top) -> np.ndarray:
    """Bottom colors for an array of top tuples (shape (..., strands))."""
    cur = np.array(top, dtype=np.int64, copy=True)
    for i, e in b.letters:
        l, r = slice_apply(rack, e, cur[..., i - 1], cur[..., i])
        cur[..., i - 1] = l
        cur[..., i] = r
    return cur


@dataclass(frozen=True)
class Coloring:
    """Top colors of a closed braid; ``trace`` lists (alpha, beta, gamma, delta) per letter.

    alpha, beta enter at the left and right, gamma, delta leave at the left
    and right.
    """

    top: tuple
    trace: tuple = field(default=(), compare=False)


def make_coloring(rack, b: FramedBraid, top) -> Coloring:
    cur = [int(v) for v in top]
    trace = []
    for i, e in b.letters:
        u, v = cur[i - 1], cur[i]
        l, r = slice_apply(rack, e, u, v)
        l, r = int(l), int(r)
        trace.append((u, v, l, r))
        cur[i - 1], cur[i] = l, r
    return Coloring(tuple(int(v) for v in top), tuple(trace))


def validate_coloring(rack, b: FramedBraid, c: Coloring) -> CheckReport:
    """Recheck every crossing of the trace and the closure condition from scratch."""
    if len(c.top) != b.strands:
        return CheckReport.fail("shape", (len(c.top),), "top tuple has the wrong length")
    cur = list(c.top)
    kappa = rack.kappa
    for idx, (i, e) in enumerate(b.letters):
        u, v = cur[i - 1], cur[i]
        if e > 0:
            l, r = int(kappa[v]), int(rack.apply(u, v))
        else:
            # the unique (l, r) with kappa(l)... checked through the positive rule
            r = int(kappa[u])
            l = int(rack.apply_inv(v, r))
            if int(kappa[r]) != u or int(rack.apply(l, r)) != v:
                return CheckReport.fail("crossing", (idx,), "negative crossing rule is inconsistent")
        if c.trace:
            if tuple(c.trace[idx]) != (u, v, l, r):
                return CheckReport.fail("trace", (idx,), "recorded semi-arc colors disagree with the rules")
        cur[i - 1], cur[i] = l, r
    bad = [p for p in range(b.strands) if cur[p] != c.top[p]]
    if bad:
        return CheckReport.fail("closure", (bad[0],), "bottom color differs from top color")
    return CheckReport.ok()


# -- weights ----------------------------------------------------------------


class _Weights:
    """Per-element weight arithmetic in a finite abelian group, on integer codes."""

    def __init__(self, phi):
        self.phi = phi
        A = phi.coeff
        self.A = A
        self.size = A.size
        elems = A.decode(np.arange(A.size))
        self.add_table = A.encode(A.reduce(elems[:, None, :] + elems[None, :, :]))
        self.neg = A.encode(A.reduce(-elems))
        self.codes = phi.codes
        self.zero = 0

    def add(self, a, b):
        return self.add_table[a, b]

    def crossing(self, sign, u, v, l, r):
        if sign > 0:
            return self.codes[u, v]
        return self.neg[self.codes[l, r]]

    def convolve(self, p: dict, q: dict) -> dict:
        out: dict = {}
        for a, x in p.items():
            for b, y in q.items():
                c = int(self.add_table[a, b])
                out[c] = out.get(c, 0) + x * y
        return out


# -- unary maps from eliminated positions ----------------------------------------


@dataclass
class _Unary:
    out: np.ndarray  # -1 where undefined
    weight: Optional[np.ndarray]  # weight code per input, or None
    records: list  # (position, array input -> top color there)

    def compose(self, other: "_Unary", weights: Optional[_Weights]) -> "_Unary":
        """Apply self, then other."""
        mid = self.out
        ok = mid >= 0
        safe = np.where(ok, mid, 0)
        out = np.where(ok, other.out[safe], -1)
        w = None
        if weights is not None:
            w = weights.add(self.weight, other.weight[safe])
        recs = list(self.records) + [(p, np.where(ok, arr[safe], -1)) for p, arr in other.records]
        return _Unary(out, w, recs)


def _identity_unary(n: int, weights) -> _Unary:
    return _Unary(np.arange(n), np.zeros(n, dtype=np.int64) if weights is not None else None, [])


@dataclass
class _Op:
    kind: str  # "bin" or "un"
    pos: int  # 0-based left position for "bin", position for "un"
    sign: int = 0
    unary: Optional[_Unary] = None


def _eliminate(rack, ops: list, j: int, weights) -> Optional[list]:
    """Replace the single crossing at position j by a map on its neighbour, if deterministic."""
    n = rack.size
    touching = [t for t, op in enumerate(ops) if op.kind == "bin" and j in (op.pos, op.pos + 1)]
    L = touching[0]
    letter = ops[L]
    j_right = letter.pos + 1 == j
    k = letter.pos if j_right else letter.pos + 1
    pre = _identity_unary(n, weights)
    post = _identity_unary(n, weights)
    for t, op in enumerate(ops):
        if op.kind == "un" and op.pos == j:
            if t < L:
                pre = pre.compose(op.unary, weights)
            else:
                post = post.compose(op.unary, weights)
    kappa = rack.kappa.astype(np.int64)
    x = np.arange(n)
    sign = letter.sign
    if (sign > 0) == j_right:
        # the color leaving at j depends on both inputs: parametrize by it
        o = x
        t = post.out
        ok = t >= 0
        s = np.where(ok, pre.out[np.where(ok, t, 0)], -1)
        ok &= s >= 0
        o, t, s = o[ok], t[ok], s[ok]
        if sign > 0:  # j right: c◁s = o
            c = np.asarray(rack.apply_inv(o, s), dtype=np.int64)
            out_k = kappa[s]
            u, v, l, r = c, s, out_k, o
        else:  # j left, negative: c◁^{-1}κs = o
            c = np.asarray(rack.apply(o, kappa[s]), dtype=np.int64)
            out_k = kappa[s]
            u, v, l, r = s, c, o, out_k
        if np.unique(c).size != c.size:
            return None
        new_out = np.full(n, -1, dtype=np.int64)
        new_out[c] = out_k
        order = np.full(n, -1, dtype=np.int64)
        order[c] = np.arange(c.size)
        sel = order  # input color -> row in the parametrization
    else:
        # the color leaving at j is kappa(c)
        c = x
        o = kappa
        t = post.out[o]
        ok = t >= 0
        s = np.where(ok, pre.out[np.where(ok, t, 0)], -1)
        ok &= s >= 0
        s_safe = np.where(ok, s, 0)
        if sign > 0:  # j left: inputs (s, c)
            out_k = np.asarray(rack.apply(s_safe, c), dtype=np.int64)
            u, v, l, r = s_safe, c, out_k, o
        else:  # j right: inputs (c, s)
            out_k = np.asarray(rack.apply_inv(s_safe, kappa[c]), dtype=np.int64)
            u, v, l, r = c, s_safe, out_k, o
        new_out = np.where(ok, out_k, -1)
        sel = np.where(ok, x, -1)
        t = np.where(ok, t, -1)
        o = np.where(ok, o, 0)

    def lift(values):
        """Values indexed by the parametrization, re-indexed by input color."""
        values = np.asarray(values, dtype=np.int64)
        return np.where(sel >= 0, values[np.maximum(sel, 0)], -1)

    t_by_c = lift(t)
    o_by_c = lift(o)
    records = [(j, t_by_c)]
    safe_t = np.maximum(t_by_c, 0)
    safe_o = np.maximum(o_by_c, 0)
    for p, arr in pre.records:
        records.append((p, np.where(t_by_c >= 0, arr[safe_t], -1)))
    for p, arr in post.records:
        records.append((p, np.where(o_by_c >= 0, arr[safe_o], -1)))
    w = None
    if weights is not None:
        cw = weights.crossing(sign, lift(u).clip(0), lift(v).clip(0), lift(l).clip(0), lift(r).clip(0))
        w = weights.add(weights.add(cw, pre.weight[safe_t]), post.weight[safe_o])
    unary = _Unary(new_out, w, records)
    new_ops = []
    for t_idx, op in enumerate(ops):
        if t_idx == L:
            new_ops.append(_Op("un", k, unary=unary))
        elif op.kind == "un" and op.pos == j:
            continue
        else:
            new_ops.append(op)
    return new_ops


def _reduce(rack, b: FramedBraid, weights) -> tuple[list, set]:
    ops = [_Op("bin", i - 1, e) for i, e in b.letters]
    removed: set = set()
    while True:
        touches = {p: 0 for p in range(b.strands) if p not in removed}
        for op in ops:
            if op.kind == "bin":
                touches[op.pos] += 1
                touches[op.pos + 1] += 1
        progress = False
        for p in sorted(touches, reverse=True):
            if touches[p] == 1:
                new_ops = _eliminate(rack, ops, p, weights)
                if new_ops is not None:
                    ops = new_ops
                    removed.add(p)
                    progress = True
                    break
        if not progress:
            return ops, removed


def _groups(strands: int, ops: list, removed: set) -> list[list[int]]:
    parent = list(range(strands))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for op in ops:
        if op.kind == "bin":
            parent[find(op.pos)] = find(op.pos + 1)
    groups: dict = {}
    for p in range(strands):
        if p not in removed:
            groups.setdefault(find(p), []).append(p)
    return sorted(groups.values())


# -- the sweep --------------------------------------------------------------------


class _Sweep:
    def __init__(self, rack, positions, ops, weights, collect, budget, chunk):
        self.rack = rack
        self.n = rack.size
        self.positions = positions
        self.col = {p: c for c, p in enumerate(positions)}
        self.ops = [op for op in ops if (op.pos in self.col)]
        self.weights = weights
        self.collect = collect
        self.budget = budget
        self.chunk = chunk
        self.steps = 0
        self.found = 0
        first, last = {}, {}
        for t, op in enumerate(self.ops):
            touched = (op.pos, op.pos + 1) if op.kind == "bin" else (op.pos,)
            for p in touched:
                first.setdefault(p, t)
                last[p] = t
        plan = []
        for p in positions:
            if p not in first:  # untouched position: any color
                plan.append(("branch", p))
                plan.append(("close", p))
        for t, op in enumerate(self.ops):
            touched = (op.pos, op.pos + 1) if op.kind == "bin" else (op.pos,)
            for p in touched:
                if first[p] == t:
                    plan.append(("branch", p))
            plan.append(("op", t))
            for p in touched:
                if last[p] == t:
                    plan.append(("close", p))
        self.plan = plan
        self.branch_steps = [i for i, a in enumerate(plan) if a[0] == "branch"]

    def _charge(self, rows):
        self.steps += rows
        if self.steps > self.budget:
            raise BudgetExceeded(self.budget, self.steps, self.found)

    def run(self, first_values: Optional[np.ndarray] = None):
        k = len(self.positions)
        state = {
            "cur": np.zeros((1, k), dtype=np.int64),
            "top": np.zeros((1, k), dtype=np.int64),
            "w": np.zeros(1, dtype=np.int64),
            "rec": {},
        }
        self.counts: dict = {}
        self.tops: list = []
        self._run(0, state, first_values)
        return self

    def _expand(self, state, col, values):
        rows = state["cur"].shape[0]
        per = max(1, self.chunk // max(1, rows))
        if rows > self.chunk:
            for start in range(0, rows, self.chunk):
                sub = {key: (v[start:start + self.chunk] if key != "rec" else
                             {p: a[start:start + self.chunk] for p, a in v.items()})
                       for key, v in state.items()}
                yield from self._expand(sub, col, values)
            return
        for start in range(0, values.size, per):
            vals = values[start:start + per]
            m = vals.size
            new = {}
            for key in ("cur", "top"):
                arr = np.repeat(state[key], m, axis=0)
                if key == "cur":
                    arr[:, col] = np.tile(vals, rows)
                else:
                    arr[:, col] = np.tile(vals, rows)
                new[key] = arr
            new["w"] = np.repeat(state["w"], m)
            new["rec"] = {p: np.repeat(a, m) for p, a in state["rec"].items()}
            yield new

    def _filter(self, state, keep):
        return {key: (v[keep] if key != "rec" else {p: a[keep] for p, a in v.items()}) for key, v in state.items()}

    def _run(self, step, state, first_values):
        rack = self.rack
        while step < len(self.plan):
            action, arg = self.plan[step]
            if action == "branch":
                col = self.col[arg]
                values = np.arange(self.n)
                if first_values is not None and step == self.branch_steps[0]:
                    values = first_values
                for sub in self._expand(state, col, values):
                    self._charge(sub["cur"].shape[0])
                    self._run(step + 1, sub, first_values)
                return
            if action == "close":
                col = self.col[arg]
                keep = state["cur"][:, col] == state["top"][:, col]
                if not keep.all():
                    state = self._filter(state, keep)
                    if state["cur"].shape[0] == 0:
                        return
            else:
                op = self.ops[arg]
                cur = state["cur"]
                self._charge(cur.shape[0])
                if op.kind == "bin":
                    a, c = self.col[op.pos], self.col[op.pos + 1]
                    u, v = cur[:, a], cur[:, c]
                    l, r = slice_apply(rack, op.sign, u, v)
                    l = np.asarray(l, dtype=np.int64)
                    r = np.asarray(r, dtype=np.int64)
                    if self.weights is not None:
                        state["w"] = self.weights.add(state["w"], self.weights.crossing(op.sign, u, v, l, r))
                    cur[:, a] = l
                    cur[:, c] = r
                else:
                    col = self.col[op.pos]
                    x = cur[:, col]
                    y = op.unary.out[x]
                    if self.collect:
                        for p, arr in op.unary.records:
                            state["rec"][p] = arr[x]
                    if self.weights is not None:
                        state["w"] = self.weights.add(state["w"], op.unary.weight[x])
                    cur[:, col] = y
                    keep = y >= 0
                    if not keep.all():
                        state = self._filter(state, keep)
                        if state["cur"].shape[0] == 0:
                            return
            step += 1
        rows = state["cur"].shape[0]
        self.found += rows
        if self.weights is not None:
            vals, cnt = np.unique(state["w"], return_counts=True)
            for a, c in zip(vals.tolist(), cnt.tolist()):
                self.counts[a] = self.counts.get(a, 0) + c
        else:
            self.counts[0] = self.counts.get(0, 0) + rows
        if self.collect:
            self.tops.append((state["top"].copy(), {p: a.copy() for p, a in state["rec"].items()}))


@dataclass
class SolveResult:
    count: int
    weights: Optional[dict]  # weight code -> number of colorings
    steps: int


class ColoringSolver:
    """Counts or enumerates the colorings of a braid closure; see the module docstring."""

    def __init__(self, rack, b: FramedBraid, phi=None, budget: int = DEFAULT_BUDGET,
                 chunk: int = CHUNK, threads: int = 1):
        if phi is not None and phi.rack is not rack:
            if phi.rack.size != rack.size:
                raise PreconditionError("cocycle is defined on a different rack")
        self.rack = rack
        self.braid = b
        self.weights = _Weights(phi) if phi is not None else None
        self.budget = budget
        self.chunk = chunk
        self.threads = max(1, int(threads))
        self.ops, self.removed = _reduce(rack, b, self.weights)
        self.groups = _groups(b.strands, self.ops, self.removed)

    def _sweep(self, positions, collect, first_values=None):
        return _Sweep(self.rack, positions, self.ops, self.weights, collect, self.budget, self.chunk).run(first_values)

    def _group_counts(self, positions) -> tuple[dict, int]:
        if self.threads == 1:
            sw = self._sweep(positions, False)
            return sw.counts, sw.steps
        blocks = np.array_split(np.arange(self.rack.size), self.threads)
        with ThreadPoolExecutor(self.threads) as pool:
            sweeps = list(pool.map(lambda vals: self._sweep(positions, False, vals), blocks))
        total: dict = {}
        for sw in sweeps:
            for key, c in sw.counts.items():
                total[key] = total.get(key, 0) + c
        return total, sum(sw.steps for sw in sweeps)

    def solve(self) -> SolveResult:
        total = {0: 1}
        steps = 0
        for positions in self.groups:
            counts, s = self._group_counts(positions)
            steps += s
            if self.weights is not None:
                total = self.weights.convolve(total, counts)
            else:
                total = {0: total[0] * counts.get(0, 0)}
            if not any(total.values()):
                break
        count = sum(total.values())
        return SolveResult(count, {k: v for k, v in total.items() if v} if self.weights is not None else None, steps)

    def tops(self) -> Iterator[tuple]:
        """Top tuples of all colorings, ordered group by group (lexicographic within blocks)."""
        per_group = []
        for positions in self.groups:
            sw = self._sweep(positions, True)
            rows = []
            for top, rec in sw.tops:
                for r in range(top.shape[0]):
                    assign = {p: int(top[r, c]) for c, p in enumerate(positions)}
                    for p, arr in rec.items():
                        assign[p] = int(arr[r])
                    rows.append(assign)
            rows.sort(key=lambda a: tuple(a[p] for p in sorted(a)))
            per_group.append(rows)
            if not rows:
                return
        for combo in itertools.product(*per_group):
            full = {}
            for part in combo:
                full.update(part)
            yield tuple(full[p] for p in range(self.braid.strands))


def enumerate_colorings(rack, b: FramedBraid, budget: int = DEFAULT_BUDGET) -> Iterator[Coloring]:
    for top in ColoringSolver(rack, b, budget=budget).tops():
        yield make_coloring(rack, b, top)


def count_colorings(rack, b: FramedBraid, budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    return ColoringSolver(rack, b, budget=budget, threads=threads).solve().count


def normalized_count(rack, b: FramedBraid, budget: int = DEFAULT_BUDGET, threads: int = 1) -> Fraction:
    """|Col_X(b)| / |Ann(X)|^{#components}."""
    from .braid import closure_stats

    m = ann(rack).size
    if m == 0:
        raise PreconditionError("Ann(X) is empty; the count cannot be normalized")
    c = closure_stats(b).count
    return Fraction(count_colorings(rack, b, budget, threads), m ** c)


def brute_force_tops(rack, b: FramedBraid, limit: int = 10 ** 6) -> np.ndarray:
    """All fixed top tuples by direct propagation of every tuple in X^s."""
    n, s = rack.size, b.strands
    if n ** s > limit:
        raise PreconditionError(f"|X|^s = {n ** s} exceeds the brute-force limit {limit}")
    grid = np.array(list(itertools.product(range(n), repeat=s)), dtype=np.int64).reshape(-1, s)
    bottom = propagate(rack, b, grid)
    return grid[(bottom == grid).all(axis=1)]


def brute_force_count(rack, b: FramedBraid, limit: int = 10 ** 6) -> int:
    return int(brute_force_tops(rack, b, limit).shape[0])
