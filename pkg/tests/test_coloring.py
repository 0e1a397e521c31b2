import itertools

import numpy as np
import pytest

from skewrack.braid import build_hopf, build_torus2, parse_braid
from skewrack.coloring import (
    ColoringSolver, brute_force_count, brute_force_tops, count_colorings, enumerate_colorings, make_coloring,
    normalized_count, propagate, slice_apply, validate_coloring,
)
from skewrack.constructions import conjugation_rack, normal_pair_rack, product_rack
from skewrack.groups import alternating_elements, cyclic_group, sl2_group, symmetric_group
from skewrack.rack import ann
from skewrack.report import BudgetExceeded, PreconditionError


@pytest.fixture(scope="module")
def z3sq():
    return product_rack(cyclic_group(3))


def pair(x, a):
    return x * 3 + a


def test_slice_apply_positive(z3sq):
    l, r = slice_apply(z3sq, 1, pair(0, 1), pair(0, 2))
    assert (int(l), int(r)) == (pair(0, 2), pair(2, 1))


def test_slice_negative_inverts_positive(z3sq):
    for u, v in itertools.product(range(9), repeat=2):
        l, r = slice_apply(z3sq, 1, u, v)
        assert tuple(int(t) for t in slice_apply(z3sq, -1, l, r)) == (u, v)
        l, r = slice_apply(z3sq, -1, u, v)
        assert tuple(int(t) for t in slice_apply(z3sq, 1, l, r)) == (u, v)


def test_unknot_counts(z3sq):
    assert count_colorings(z3sq, parse_braid("1:")) == 9
    assert count_colorings(z3sq, parse_braid("2: 1")) == 3
    assert count_colorings(z3sq, parse_braid("2: -1")) == 3


@pytest.mark.parametrize("rack", [
    product_rack(cyclic_group(3)), conjugation_rack(symmetric_group(3)), product_rack(symmetric_group(3)),
    normal_pair_rack(symmetric_group(3), alternating_elements(3))[0],
])
def test_kink_colorings_are_ann(rack):
    # a single kink closes only on x with x◁kappa(x) = kappa(x)
    tops = sorted(tuple(int(v) for v in t) for t in ColoringSolver(rack, parse_braid("2: 1")).tops())
    assert [t[0] for t in tops] == ann(rack).tolist()
    assert all(t[1] == int(rack.kappa[t[0]]) for t in tops)


def test_validate_and_trace(z3sq):
    b = parse_braid("3: 1 -2 1 1")
    cols = list(enumerate_colorings(z3sq, b))
    assert len(cols) == brute_force_count(z3sq, b)
    for c in cols:
        assert validate_coloring(z3sq, b, c)
        assert len(c.trace) == len(b)


def test_perturbed_top_fails_closure(z3sq):
    b = parse_braid("2: 1 1")
    c = next(enumerate_colorings(z3sq, b))
    top = list(c.top)
    top[0] = (top[0] + 1) % 9
    rep = validate_coloring(z3sq, b, make_coloring(z3sq, b, top))
    assert not rep and rep.axiom == "closure"
    rep = validate_coloring(z3sq, b, type(c)(tuple(top[:1])))
    assert rep.axiom == "shape"


def test_forged_trace_rejected(z3sq):
    b = parse_braid("2: 1 1")
    c = next(enumerate_colorings(z3sq, b))
    trace = list(c.trace)
    u, v, l, r = trace[0]
    trace[0] = (u, v, (l + 1) % 9, r)
    forged = type(c)(c.top, tuple(trace))
    assert validate_coloring(z3sq, b, forged).axiom == "trace"


def test_propagate_batch(z3sq):
    b = parse_braid("2: 1 -1 1")
    grid = np.array(list(itertools.product(range(9), repeat=2)))
    out = propagate(z3sq, b, grid)
    for row, bottom in zip(grid, out):
        assert tuple(bottom) == tuple(int(v) for v in propagate(z3sq, b, row))


def test_sl2_trefoil_count():
    rack = product_rack(sl2_group(3))
    assert count_colorings(rack, build_torus2(3, 1)) == 24


def test_hopf_normal_pair_count():
    rack, _ = normal_pair_rack(cyclic_group(11))
    assert count_colorings(rack, build_hopf(12, 1)) == 1331


def test_normalized_count(z3sq):
    assert normalized_count(z3sq, parse_braid("1:")) == 3
    assert normalized_count(z3sq, parse_braid("2: 1 1")) == 1


def test_budget_exceeded():
    rack = product_rack(sl2_group(3))
    with pytest.raises(BudgetExceeded):
        count_colorings(rack, build_torus2(3, 1), budget=10)


def test_brute_force_limit(z3sq):
    with pytest.raises(PreconditionError):
        brute_force_tops(z3sq, parse_braid("8: 1"), limit=1000)


def test_threads_do_not_change_counts():
    rack = product_rack(sl2_group(3))
    b = build_torus2(3, 1)
    assert count_colorings(rack, b, threads=3) == count_colorings(rack, b)


def test_solver_matches_brute_force_examples(z3sq):
    s3 = conjugation_rack(symmetric_group(3))
    for text in ["3: 1 2 1 2", "3: 1 -2 1 -2", "4: 1 2 3 -1", "3: 2 2 2 1", "4: 2 -3 1 1 2"]:
        b = parse_braid(text)
        for rack in (z3sq, s3):
            assert count_colorings(rack, b) == brute_force_count(rack, b)
            found = sorted(tuple(int(v) for v in t) for t in ColoringSolver(rack, b).tops())
            assert found == sorted(tuple(int(v) for v in t) for t in brute_force_tops(rack, b))

