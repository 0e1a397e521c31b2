"""Framed closed braids used as surgery diagrams.

A braid on ``s`` strands is read top to bottom; letter ``(i, e)`` is the
generator sigma_i^e crossing positions i and i+1 (1-based).  The framing of a
component is its self-writhe in the closure (blackboard framing).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .report import PreconditionError

_WORD = re.compile(r"^\s*(\d+)\s*:\s*(.*?)\s*$")


class BraidParseError(ValueError):
    pass


@dataclass(frozen=True)
class FramedBraid:
    strands: int
    letters: tuple = ()

    def __post_init__(self):
        if self.strands < 1:
            raise PreconditionError("a braid needs at least one strand")
        letters = tuple((int(i), int(e)) for i, e in self.letters)
        for i, e in letters:
            if not 1 <= i < self.strands:
                raise PreconditionError(f"letter position {i} out of range for {self.strands} strands")
            if e not in (1, -1):
                raise PreconditionError(f"letter sign must be +1 or -1, got {e}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_word(cls, strands: int, word: Sequence[int]) -> "FramedBraid":
        if any(w == 0 for w in word):
            raise PreconditionError("word entries must be nonzero")
        return cls(strands, tuple((abs(w), 1 if w > 0 else -1) for w in word))

    @property
    def word(self) -> tuple:
        return tuple(i * e for i, e in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return serialize_braid(self)

    def permutation(self) -> list[int]:
        """perm[p] = bottom position (0-based) of the strand starting at top position p."""
        where = list(range(self.strands))  # where[p] = strand at position p
        for i, _ in self.letters:
            where[i - 1], where[i] = where[i], where[i - 1]
        perm = [0] * self.strands
        for pos, strand in enumerate(where):
            perm[strand] = pos
        return perm

    def shifted(self, offset: int, strands: Optional[int] = None) -> "FramedBraid":
        return FramedBraid(strands or self.strands + offset, tuple((i + offset, e) for i, e in self.letters))

    def inserted(self, index: int, letters: Sequence[tuple], strands: Optional[int] = None) -> "FramedBraid":
        new = self.letters[:index] + tuple(letters) + self.letters[index:]
        return FramedBraid(strands or self.strands, new)

    def rotated(self, k: int) -> "FramedBraid":
        """Cyclic rotation of the word; the closure is unchanged."""
        if not self.letters:
            return self
        k %= len(self.letters)
        return FramedBraid(self.strands, self.letters[k:] + self.letters[:k])


def parse_braid(text: str) -> FramedBraid:
    m = _WORD.match(text)
    if not m:
        raise BraidParseError(f"expected 's: w1 w2 ...', got {text!r}")
    strands = int(m.group(1))
    body = m.group(2)
    try:
        word = [int(tok) for tok in body.replace(",", " ").split()]
    except ValueError:
        raise BraidParseError(f"non-integer letter in {text!r}") from None
    if strands < 1:
        raise BraidParseError("strand count must be positive")
    for w in word:
        if w == 0 or abs(w) >= strands:
            raise BraidParseError(f"letter {w} invalid for {strands} strands")
    return FramedBraid.from_word(strands, word)


def serialize_braid(b: FramedBraid) -> str:
    body = " ".join(str(w) for w in b.word)
    return f"{b.strands}:" + (f" {body}" if body else "")


@dataclass(frozen=True)
class DiagramStats:
    components: tuple  # tuple of tuples of top positions (0-based), ordered by least position
    writhes: tuple
    linking: tuple  # symmetric matrix as nested tuples, framings on the diagonal
    crossings: int

    @property
    def count(self) -> int:
        return len(self.components)

    @property
    def framings(self) -> tuple:
        return self.writhes

    def linking_matrix(self) -> np.ndarray:
        return np.array(self.linking, dtype=np.int64).reshape(self.count, self.count)

    def component_of(self, position: int) -> int:
        for c, members in enumerate(self.components):
            if position in members:
                return c
        raise KeyError(position)

    def to_json(self) -> dict:
        return {"components": self.count, "framings": list(self.writhes),
                "linking": [list(r) for r in self.linking]}


def component_labels(b: FramedBraid) -> list[int]:
    """Component index of every top position; components ordered by least position."""
    perm = b.permutation()
    label = [-1] * b.strands
    c = 0
    for start in range(b.strands):
        if label[start] >= 0:
            continue
        p = start
        while label[p] < 0:
            label[p] = c
            p = perm[p]
        c += 1
    return label


def closure_stats(b: FramedBraid) -> DiagramStats:
    label = component_labels(b)
    ncomp = max(label) + 1
    twice = np.zeros((ncomp, ncomp), dtype=np.int64)
    where = list(range(b.strands))
    for i, e in b.letters:
        ca, cb = label[where[i - 1]], label[where[i]]
        if ca == cb:
            twice[ca, ca] += 2 * e
        else:
            twice[ca, cb] += e
            twice[cb, ca] += e
        where[i - 1], where[i] = where[i], where[i - 1]
    if (twice % 2).any():
        raise AssertionError("odd inter-component crossing count")
    lk = twice // 2
    comps = tuple(tuple(p for p in range(b.strands) if label[p] == c) for c in range(ncomp))
    return DiagramStats(comps, tuple(int(lk[c, c]) for c in range(ncomp)),
                        tuple(tuple(int(v) for v in row) for row in lk), len(b.letters))


# -- stabilizations and kinks -----------------------------------------------


def stabilize(b: FramedBraid, sign: int) -> FramedBraid:
    """Add strand s+1 and append sigma_s^sign (right Markov stabilization)."""
    return FramedBraid(b.strands + 1, b.letters + ((b.strands, sign),))


def stabilize_left(b: FramedBraid, sign: int) -> FramedBraid:
    """Add a strand on the left and append sigma_1^sign."""
    return FramedBraid(b.strands + 1, tuple((i + 1, e) for i, e in b.letters) + ((1, sign),))


def _strand_positions(b: FramedBraid) -> list[list[int]]:
    """positions[t][p] = top position of the strand sitting at position p after t letters."""
    where = list(range(b.strands))
    out = [where.copy()]
    for i, _ in b.letters:
        where[i - 1], where[i] = where[i], where[i - 1]
        out.append(where.copy())
    return out


def _add_kink(b: FramedBraid, component: int, sign: int, side: str) -> tuple[FramedBraid, str]:
    if sign not in (1, -1):
        raise PreconditionError("kink sign must be +1 or -1")
    if side not in ("auto", "right", "left", "route"):
        raise PreconditionError(f"unknown side {side!r}")
    label = component_labels(b)
    if not 0 <= component <= max(label):
        raise PreconditionError(f"unknown component {component}")
    s = b.strands
    history = _strand_positions(b)
    if side in ("auto", "right"):
        for t, where in enumerate(history):
            if label[where[s - 1]] == component:
                return b.inserted(t, [(s, sign)], strands=s + 1), "right"
    if side in ("auto", "left"):
        for t, where in enumerate(history):
            if label[where[0]] == component:
                shifted = b.shifted(1)
                return shifted.inserted(t, [(1, sign)]), "left"
    # route from the bottom position q to the right end and back
    final = history[-1]
    q = next(p for p in range(s) if label[final[p]] == component) + 1
    route = [(i, 1) for i in range(q, s)]
    back = [(i, -1) for i in range(s - 1, q - 1, -1)]
    return FramedBraid(s + 1, b.letters + tuple(route) + ((s, sign),) + tuple(back)), "route"


def add_kink(b: FramedBraid, component: int, sign: int, side: str = "auto") -> FramedBraid:
    """One kink of the given sign on a component; framing changes by ``sign``.

    The kink is inserted where the component passes the rightmost (or
    leftmost) position; if it never does, the strand is routed to the right
    end by conjugating letters, stabilized, and routed back.
    """
    return _add_kink(b, component, sign, side)[0]


def add_kinks_at(b: FramedBraid, position: int, count: int, sign: int) -> tuple[FramedBraid, int]:
    """``count`` kinks on the component through top ``position`` (0-based).

    Returns the new braid and the new top position of that strand, which
    moves when a kink goes on the left side.
    """
    for _ in range(count):
        comp = component_labels(b)[position]
        b, side = _add_kink(b, comp, sign, "auto")
        if side == "left":
            position += 1
    return b, position


def _reaches_side(b: FramedBraid, component: int) -> bool:
    label = component_labels(b)
    return any(label[w[0]] == component or label[w[-1]] == component for w in _strand_positions(b))


def add_framing_kinks(b: FramedBraid, component: int, count: int, sign: int, side: str = "auto") -> FramedBraid:
    """Change the framing of one component by ``count*sign`` with kinks.

    Other components keep their framings and linking numbers.  Component
    indices are by least top position, so a left-side kink can reorder them.
    A component that never reaches either side is routed to the right end
    once and given all ``count`` kinks there as a chain of stabilizations.
    """
    if count < 0:
        raise PreconditionError("count must be nonnegative")
    if count and (side == "route" or (side == "auto" and not _reaches_side(b, component))):
        if sign not in (1, -1):
            raise PreconditionError("kink sign must be +1 or -1")
        label = component_labels(b)
        if not 0 <= component <= max(label):
            raise PreconditionError(f"unknown component {component}")
        s = b.strands
        final = _strand_positions(b)[-1]
        q = next(p for p in range(s) if label[final[p]] == component) + 1
        route = [(i, 1) for i in range(q, s)]
        kinks = [(s + j, sign) for j in range(count)]
        back = [(i, -1) for i in range(s - 1, q - 1, -1)]
        return FramedBraid(s + count, b.letters + tuple(route + kinks + back))
    for _ in range(count):
        b = add_kink(b, component, sign, side)
    return b


def insert_local_kink(b: FramedBraid, index: int, position: int, sign: int) -> FramedBraid:
    """A kink on the strand at ``position`` (1-based) just before letter ``index``."""
    s = b.strands
    route = [(i, 1) for i in range(position, s)]
    back = [(i, -1) for i in range(s - 1, position - 1, -1)]
    return b.inserted(index, route + [(s, sign)] + back, strands=s + 1)


# -- builders ---------------------------------------------------------------


def build_unknot(k: int = 0) -> FramedBraid:
    b = FramedBraid(1)
    for _ in range(abs(k)):
        b = stabilize(b, 1 if k > 0 else -1)
    return b


def build_hopf(n: int, m: int) -> FramedBraid:
    """Hopf link with framings (n, m) on components (0, 1)."""
    b = FramedBraid(2, ((1, 1), (1, 1)))
    b = add_framing_kinks(b, 1, abs(m), 1 if m > 0 else -1, side="right")
    b = add_framing_kinks(b, 0, abs(n), 1 if n > 0 else -1, side="left")
    return b


def build_torus2(n: int, framing: int) -> FramedBraid:
    """Closure of sigma_1^n (n odd) with kinks bringing the framing to ``framing``."""
    if n % 2 == 0:
        raise PreconditionError("the (2,n) torus knot needs odd n")
    b = FramedBraid(2, ((1, 1 if n > 0 else -1),) * abs(n))
    diff = framing - n
    return add_framing_kinks(b, 0, abs(diff), 1 if diff > 0 else -1, side="right")


def negative_continued_fraction(p: int, q: int) -> list[int]:
    """a_1, ..., a_k with p/q = a_1 - 1/(a_2 - 1/(... - 1/a_k)), each a_i >= 2."""
    if not (0 < q < p) or math.gcd(p, q) != 1:
        raise PreconditionError("need 0 < q < p with gcd(p, q) = 1")
    out = []
    while q:
        a = -(-p // q)
        out.append(a)
        p, q = q, a * q - p
    return out


def build_lens_chain(p: int, q: int) -> FramedBraid:
    """Linear chain of unknots with framings from the negative continued fraction of p/q."""
    coeffs = negative_continued_fraction(p, q)
    k = len(coeffs)
    b = FramedBraid(k, tuple((i, 1) for i in range(1, k) for _ in range(2)))
    # right side first (labels stay put), the first component last on the left
    for c in range(k - 1, 0, -1):
        a = coeffs[c]
        b = add_framing_kinks(b, c, abs(a), 1 if a > 0 else -1, side="right" if c == k - 1 else "route")
    return add_framing_kinks(b, 0, abs(coeffs[0]), 1 if coeffs[0] > 0 else -1, side="left" if k > 1 else "right")


def build_fr_pair(b: FramedBraid, n: int, sign: int) -> tuple[FramedBraid, FramedBraid]:
    """Both sides of a Fenn-Rourke move on strands 1..n at the top of ``b``.

    ``D`` adds an unknot with framing ``sign`` encircling the strands; its
    component is index 0.  ``D'`` replaces it by a full twist of sign
    ``-sign`` on those strands, each strand's framing shifted by kinks so the
    linking matrix becomes K_ij - sign*l_i*l_j.  Kinks placed on the left
    can change the order in which ``D'`` numbers its components.
    """
    if sign not in (1, -1):
        raise PreconditionError("sign must be +1 or -1")
    if not 0 <= n <= b.strands:
        raise PreconditionError("n must be between 0 and the number of strands")
    circle = [(1, sign)]
    circle += [(i, 1) for i in range(2, n + 2)] + [(i, 1) for i in range(n + 1, 1, -1)]
    d = FramedBraid(b.strands + 2, tuple(circle) + tuple((i + 2, e) for i, e in b.letters))
    twist = tuple((i, -sign) for _ in range(n) for i in range(1, n))
    dp = FramedBraid(b.strands, twist + b.letters)
    label = component_labels(b)
    through = [0] * (max(label) + 1)
    for p in range(n):
        through[label[p]] += 1
    # one tracked top position per component; left kinks shift them all
    reps = [label.index(c) for c in range(len(through))]
    for c, l in enumerate(through):
        dp, pos = add_kinks_at(dp, reps[c], l, -sign)
        shift = pos - reps[c]
        reps = [r + shift for r in reps]
    return d, dp


def fr_expected_linking(b: FramedBraid, n: int, sign: int) -> np.ndarray:
    """K_ij - sign*l_i*l_j for the components of ``b``."""
    stats = closure_stats(b)
    label = component_labels(b)
    l = np.zeros(stats.count, dtype=np.int64)
    for p in range(n):
        l[label[p]] += 1
    return stats.linking_matrix() - sign * np.outer(l, l)


def build_link_homotopy_pair(b: FramedBraid, index: int, kink_sign: int = -1) -> tuple[FramedBraid, FramedBraid]:
    """A self-crossing change compensated by two kinks.

    Letter ``index`` of ``b`` must be a self-crossing.  ``D`` carries a kink of
    sign ``kink_sign`` on the left strand just before and just after that
    letter, whose sign is set to ``-kink_sign``; ``D'`` has the letter with
    sign ``kink_sign`` and no kinks.  Framings agree.
    """
    i, _ = b.letters[index]
    label = component_labels(b)
    where = _strand_positions(b)[index]
    if label[where[i - 1]] != label[where[i]]:
        raise PreconditionError("the chosen letter is not a self-crossing")
    letters = list(b.letters)
    letters[index] = (i, -kink_sign)
    d = FramedBraid(b.strands, tuple(letters))
    d = insert_local_kink(d, index + 1, i, kink_sign)
    d = insert_local_kink(d, index, i, kink_sign)
    letters[index] = (i, kink_sign)
    dp = FramedBraid(b.strands, tuple(letters))
    return d, dp
