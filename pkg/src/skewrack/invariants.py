"""Cocycle weights, the normalized weight polynomial and the surgery criteria."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .braid import FramedBraid, build_fr_pair, closure_stats, component_labels, serialize_braid
from .cocycle import BirackCocycle
from .coloring import DEFAULT_BUDGET, Coloring, ColoringSolver, count_colorings, validate_coloring
from .constructions import normal_pair_rack, product_rack, z2_cocycle
from .groups import FiniteAbelianGroup, FiniteGroup, identity_hom
from .homology import hom_count_abelian, smith_normal_form
from .rack import ann, check_f_link_homotopic, inn_even_orbits
from .report import CheckReport, PreconditionError

OBSTRUCTED = "OBSTRUCTED"
INCONCLUSIVE = "INCONCLUSIVE"


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class WeightPolynomial:
    """Sum of t^weight over colorings divided by |Ann(X)|^{#components}.

    ``coeffs`` maps coefficient-group elements (tuples) to nonzero fractions.
    """

    coeff: FiniteAbelianGroup
    coeffs: tuple  # sorted ((element tuple, Fraction), ...)
    ann: int
    components: int

    @classmethod
    def from_counts(cls, coeff: FiniteAbelianGroup, counts: dict, ann_size: int, components: int):
        scale = ann_size ** components
        items = []
        for code, c in counts.items():
            if c:
                elem = tuple(int(v) for v in coeff.decode(code))
                items.append((elem, Fraction(c, scale)))
        return cls(coeff, tuple(sorted(items)), ann_size, components)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    @property
    def mass(self) -> Fraction:
        return sum((c for _, c in self.coeffs), Fraction(0))

    @property
    def support(self) -> tuple:
        return tuple(e for e, _ in self.coeffs)

    def concentrated_at_zero(self) -> bool:
        return all(e == self.coeff.zero for e in self.support)

    def same_class(self, other: "WeightPolynomial") -> bool:
        """Equality of normalized polynomials, the FR-equivalence test."""
        return self.coeff == other.coeff and self.coeffs == other.coeffs

    def to_json(self) -> dict:
        return {
            "ann": self.ann,
            "components": self.components,
            "coeffs": {"(" + ",".join(map(str, e)) + ")": format_fraction(c) for e, c in self.coeffs},
        }

    def __str__(self) -> str:
        terms = []
        for e, c in self.coeffs:
            power = e[0] if len(e) == 1 else e
            terms.append(f"{format_fraction(c)}*t^{power}")
        return " + ".join(terms) or "0"


def weight_of_coloring(phi: BirackCocycle, b: FramedBraid, c: Coloring) -> tuple:
    """Sum of +phi(in_left, in_right) over positive and -phi(out_left, out_right) over negative letters."""
    if not c.trace and b.letters:
        raise PreconditionError("coloring carries no trace")
    if len(c.trace) != len(b.letters):
        raise PreconditionError("trace does not match the braid")
    A = phi.coeff
    total = np.zeros(A.rank, dtype=np.int64)
    for (i, e), (u, v, l, r) in zip(b.letters, c.trace):
        total += phi.table[u, v] if e > 0 else -phi.table[l, r]
    return tuple(int(x) for x in A.reduce(total))


def weight_counts(phi: BirackCocycle, b: FramedBraid, budget: int = DEFAULT_BUDGET, threads: int = 1) -> dict:
    return ColoringSolver(phi.rack, b, phi=phi, budget=budget, threads=threads).solve().weights


def weight_polynomial(phi: BirackCocycle, b: FramedBraid, budget: int = DEFAULT_BUDGET,
                      threads: int = 1) -> WeightPolynomial:
    m = ann(phi.rack).size
    if m == 0:
        raise PreconditionError("Ann(X) is empty; the polynomial cannot be normalized")
    counts = weight_counts(phi, b, budget, threads)
    return WeightPolynomial.from_counts(phi.coeff, counts, m, closure_stats(b).count)


# -- Fenn-Rourke harnesses ---------------------------------------------------------


def random_base_braid(rng: np.random.Generator, max_strands: int, max_letters: int = 6) -> FramedBraid:
    s = int(rng.integers(1, max_strands + 1))
    if s == 1:
        return FramedBraid(1)
    length = int(rng.integers(0, max_letters + 1))
    word = [int(rng.integers(1, s)) * int(rng.choice((-1, 1))) for _ in range(length)]
    return FramedBraid.from_word(s, word)


def fr_cases(trials: int, max_strands: int, seed: int = 0, max_letters: int = 6, n_values=(0, 1, 2)):
    """(trial, base braid, n, sign) for the seeded random Fenn-Rourke test set."""
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        b = random_base_braid(rng, max_strands, max_letters)
        for n in n_values:
            if n > b.strands:
                continue
            for sign in (1, -1):
                yield trial, b, n, sign


def check_fr_invariance(rack, trials: int = 25, max_strands: int = 3, seed: int = 0, max_letters: int = 6,
                        budget: int = DEFAULT_BUDGET) -> CheckReport:
    """normalized count of D equals that of D' on seeded random Fenn-Rourke pairs."""
    m = ann(rack).size
    if m == 0:
        return CheckReport.fail("FR1-empty", (), "Ann(X) is empty")
    pairs = 0
    for trial, b, n, sign in fr_cases(trials, max_strands, seed, max_letters):
        d, dp = build_fr_pair(b, n, sign)
        left = Fraction(count_colorings(rack, d, budget), m ** closure_stats(d).count)
        right = Fraction(count_colorings(rack, dp, budget), m ** closure_stats(dp).count)
        pairs += 1
        if left != right:
            return CheckReport.fail("FR-count", (trial, n, sign),
                                    f"base {serialize_braid(b)}: {format_fraction(left)} != {format_fraction(right)}")
    return CheckReport.ok(f"{pairs} pairs")


def check_cocycle_property_fr(phi: BirackCocycle, max_strands: int = 3, trials: int = 25, seed: int = 0,
                              max_letters: int = 6, budget: int = DEFAULT_BUDGET) -> CheckReport:
    """Weight polynomials of D and D' agree on seeded random Fenn-Rourke pairs."""
    pairs = 0
    for trial, b, n, sign in fr_cases(trials, max_strands, seed, max_letters):
        d, dp = build_fr_pair(b, n, sign)
        left = weight_polynomial(phi, d, budget)
        right = weight_polynomial(phi, dp, budget)
        pairs += 1
        if not left.same_class(right):
            return CheckReport.fail("FR-weight", (trial, n, sign),
                                    f"base {serialize_braid(b)}: {left} != {right}")
    return CheckReport.ok(f"{pairs} pairs")


def check_cocycle_f_link(phi: BirackCocycle) -> CheckReport:
    """The f-link cocycle identity for every a and every a·g with g in Inn^even, plus the rack condition."""
    rack = phi.rack
    base = check_f_link_homotopic(rack)
    if not base:
        return CheckReport.fail("rack-f-link", base.counterexample, base.detail)
    label, _, _ = inn_even_orbits(rack)
    k, t, A = rack.kappa, phi.table, phi.coeff
    for a in range(rack.size):
        ag = np.flatnonzero(label == label[a])
        ka = int(k[a])
        m = np.asarray(rack.apply(ag, ka))
        a_ka = int(rack.apply(a, ka))
        lhs = t[m, ag] + t[a, a_ka]
        rhs = t[ka, ag] + t[m, a]
        bad = np.flatnonzero(A.reduce(lhs - rhs).any(-1))
        if bad.size:
            return CheckReport.fail("f-link-cocycle", (a, int(ag[bad[0]])),
                                    "phi((a·g)◁κa, a·g) + phi(a, a◁κa) != phi(κa, a·g) + phi((a·g)◁κa, a)")
    return CheckReport.ok()


# -- surgery criteria ----------------------------------------------------------------


def criterion_count(k: FiniteGroup, n_elements: Optional[Sequence[int]], b: FramedBraid,
                    budget: int = DEFAULT_BUDGET) -> tuple[Fraction, str]:
    """|Col| / |K|^{#components} against |N| on the normal-pair rack with f = id.

    A ratio below |N| shows that ``b`` is not related by Fenn-Rourke moves
    and isotopy to any knot diagram of framing zero.
    """
    rack, _ = normal_pair_rack(k, n_elements, identity_hom(k))
    n_size = k.size if n_elements is None else len(n_elements)
    ratio = Fraction(count_colorings(rack, b, budget), k.size ** closure_stats(b).count)
    return ratio, OBSTRUCTED if ratio < n_size else INCONCLUSIVE


def criterion_weight(b: FramedBraid, k1: int, k2: int, k3: int,
                     budget: int = DEFAULT_BUDGET) -> tuple[WeightPolynomial, str]:
    """Weight polynomial of the Z/2 cocycle k1·a + k2·b + k3·ab; support off 0 obstructs."""
    poly = weight_polynomial(z2_cocycle(k1, k2, k3), b, budget)
    return poly, INCONCLUSIVE if poly.concentrated_at_zero() else OBSTRUCTED


def c_gh_coloring(k: FiniteGroup, n_elements: Sequence[int], b: FramedBraid, g: int, h_pos: int) -> tuple:
    """The coloring (h^e g, h) of a framing-zero knot on the normal-pair rack.

    ``h_pos`` indexes ``n_elements``.  The exponent e starts at 0 on top
    position 1 and changes by the crossing sign wherever the strand passes
    from the left input to the right output (positive) or from the right
    input to the left output (negative).  Returns the top tuple of element
    indices ``x*|N| + h_pos``.
    """
    stats = closure_stats(b)
    if stats.count != 1 or stats.framings[0] != 0:
        raise PreconditionError("C_{g,h} is defined on knots of framing zero")
    s = b.strands
    shift = [0] * s  # exponent change along the pass starting at each top position
    where = list(range(s))  # where[p] = top position of the strand at position p
    for i, e in b.letters:
        if e > 0:
            shift[where[i - 1]] += 1
        else:
            shift[where[i]] -= 1
        where[i - 1], where[i] = where[i], where[i - 1]
    perm = b.permutation()
    h = int(n_elements[h_pos])
    expo = [0] * s
    p, e = 0, 0
    for _ in range(s):
        expo[p] = e
        e += shift[p]
        p = perm[p]
    nn = len(n_elements)
    return tuple(int(k.mult[k.power(h, expo[p]), g]) * nn + h_pos for p in range(s))


def check_c_gh_family(k: FiniteGroup, n_elements: Sequence[int], b: FramedBraid) -> CheckReport:
    """Every C_{g,h} validates and the |K x N| tops are distinct."""
    from .coloring import make_coloring

    rack, _ = normal_pair_rack(k, n_elements, identity_hom(k))
    seen = set()
    for g in range(k.size):
        for hp in range(len(n_elements)):
            top = c_gh_coloring(k, n_elements, b, g, hp)
            rep = validate_coloring(rack, b, make_coloring(rack, b, top))
            if not rep:
                return CheckReport.fail("C_gh", (g, hp), rep.detail)
            seen.add(top)
    if len(seen) != k.size * len(n_elements):
        return CheckReport.fail("C_gh-distinct", (len(seen),), "colorings coincide")
    return CheckReport.ok(f"{len(seen)} colorings")


def abelian_h1_oracle(k: FiniteGroup, b: FramedBraid, budget: int = DEFAULT_BUDGET) -> CheckReport:
    """Coloring count against |Hom(H_1, K)|·|K|^{#components} for abelian K."""
    if not k.is_abelian():
        raise PreconditionError("the H_1 oracle needs an abelian group")
    rack = product_rack(k, identity_hom(k))
    stats = closure_stats(b)
    divisors = smith_normal_form(stats.linking)
    expected = hom_count_abelian(divisors, k) * k.size ** stats.count
    got = count_colorings(rack, b, budget)
    if got != expected:
        return CheckReport.fail("H1", (got, expected), f"divisors {divisors}")
    return CheckReport.ok(f"{got} colorings; divisors {divisors}")
