import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from skewrack.groups import (
    FiniteGroup, Group2Cocycle, build_cyclic, build_sl2p, build_symmetric, central_extension,
    cyclic_coefficients, cyclic_group, direct_product, identity_hom, inversion_map, power_hom,
    symmetric_group, theta_prime, theta_prime_sum, verify_group_2cocycle, verify_involutive_automorphism,
)
from skewrack.homology import hom_count_abelian, smith_normal_form
from skewrack.report import PreconditionError, StructureError


def test_group_orders():
    assert build_sl2p(3).size == 24
    assert build_sl2p(5).size == 120
    assert build_cyclic(1).size == 1
    assert build_symmetric(3).size == 6


def test_sl2_is_nonabelian_with_center_pm1():
    g = build_sl2p(3)
    assert not g.is_abelian()
    center = [z for z in range(g.size) if all(g.mult[z, x] == g.mult[x, z] for x in range(g.size))]
    assert sorted(g.label(z) for z in center) == ["[[1,0],[0,1]]", "[[2,0],[0,2]]"]


def test_symmetric_labels_and_composition():
    s3 = symmetric_group(3)
    a, b = s3.index("(1 2)"), s3.index("(1 3)")
    # conjugate (12) by (13): (13)(12)(13) = (23)
    assert s3.label(s3.product([s3.inv[b], a, b])) == "(2 3)"


def test_bad_tables_rejected():
    with pytest.raises(StructureError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(PreconditionError):
        build_sl2p(4)


def test_involutive_automorphisms():
    assert verify_involutive_automorphism(identity_hom(symmetric_group(3)))
    assert verify_involutive_automorphism(inversion_map(cyclic_group(4)))
    rep = verify_involutive_automorphism(power_hom(cyclic_group(5), 2))
    assert not rep and rep.counterexample is not None


def test_theta_prime_values():
    t = theta_prime(3, 1).table[:, :, 0]
    assert t[1, 1] == 2
    assert t[1, 2] == 0
    assert (t[:, 0] == 0).all()


def test_theta_prime_sum_differs_from_closed_form():
    assert theta_prime_sum(3, 1)[1, 1] == 0
    assert theta_prime(3, 1).table[1, 1, 0] == 2


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_theta_prime_is_cocycle(p):
    assert verify_group_2cocycle(theta_prime(p, 1))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_theta_prime_minus_is_not_cocycle(p):
    rep = verify_group_2cocycle(theta_prime(p, -1))
    assert not rep and rep.counterexample == (1, 1, 1)


def test_perturbed_theta_fails():
    th = theta_prime(3, 1)
    table = th.table.copy()
    table[1, 2, 0] = (table[1, 2, 0] + 1) % 3
    assert not verify_group_2cocycle(Group2Cocycle(th.group, th.coeff, table))


def test_central_extension_z9():
    th = theta_prime(3, 1)
    ext = central_extension(th.group, th)
    assert ext.size == 9
    assert ext.element_order(1 * 3 + 0) == 9


def test_central_extension_z4():
    z2 = cyclic_group(2)
    th = Group2Cocycle(z2, cyclic_coefficients(2), np.array([[0, 0], [0, 1]]))
    ext = central_extension(z2, th)
    assert sorted(ext.element_order(x) for x in range(4)) == [1, 2, 4, 4]


def test_central_extension_trivial_is_product():
    z3 = cyclic_group(3)
    ext = central_extension(z3, Group2Cocycle(z3, cyclic_coefficients(3), np.zeros((3, 3), int)))
    assert (ext.mult == direct_product(z3, z3).mult).all()


def test_group_json_roundtrip():
    g = symmetric_group(3)
    h = FiniteGroup.from_json(g.to_json())
    assert (h.mult == g.mult).all() and h.label(3) == g.label(3)


@pytest.mark.parametrize("matrix, expected", [
    ([[3]], (3,)),
    ([[2, 1], [1, 1]], (1, 1)),
    ([[4, 1], [1, 3]], (1, 11)),
    ([[12, 1], [1, 1]], (1, 11)),
    ([[0]], (0,)),
    ([[0, 1], [1, 0]], (1, 1)),
    ([[2, 0], [0, 0]], (2, 0)),
])
def test_smith_normal_form(matrix, expected):
    assert smith_normal_form(matrix) == expected


def _sympy_divisors(m):
    from sympy.matrices.normalforms import smith_normal_form as snf

    d = snf(sympy.Matrix(m), domain=sympy.ZZ)
    vals = [abs(int(d[i, i])) for i in range(min(d.shape))]
    return tuple(sorted(v for v in vals if v) + [0] * vals.count(0))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_snf_matches_sympy(m):
    ours = smith_normal_form(m)
    assert ours == _sympy_divisors(m)
    nz = [d for d in ours if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    det = round(abs(np.linalg.det(np.array(m, dtype=float))))
    if det:
        assert int(np.prod(ours)) == det


def test_hom_count_abelian():
    assert hom_count_abelian((1, 11), cyclic_group(11)) == 11
    assert hom_count_abelian((1, 11), cyclic_group(5)) == 1
    assert hom_count_abelian((1, 1), cyclic_group(7)) == 1
    assert hom_count_abelian((0,), cyclic_group(5)) == 5
    with pytest.raises(PreconditionError):
        hom_count_abelian((2,), symmetric_group(3))
