import numpy as np
import pytest

from skewrack.cocycle import (
    BirackCocycle, extend_by_cocycle, symmetrize_cocycle, verify_birack_cocycle, verify_symmetric_cocycle,
    zero_cocycle,
)
from skewrack.constructions import (
    carry_cocycle, conjugation_rack, constant_cocycle, delta_rack, extension_cocycle, lhm8_cocycle,
    normal_pair_rack, prop28_cocycle, product_rack, twisted_conjugacy_delta, z2_cocycle,
)
from skewrack.groups import (
    Group2Cocycle, GroupHom, alternating_elements, conjugation_hom, cyclic_coefficients, cyclic_group,
    direct_product, identity_hom, inversion_map, power_hom, sl2_group, symmetric_group, theta_prime,
)
from skewrack.rack import check_f_link_homotopic, check_property_fr, verify_good_involution, verify_skew_rack
from skewrack.report import PreconditionError


def neg_hom(p):
    g = cyclic_group(p)
    return GroupHom(g, g, (-np.arange(p)) % p)


# -- racks -------------------------------------------------------------------------


def test_conjugation_examples():
    s3 = symmetric_group(3)
    r = conjugation_rack(s3)
    assert s3.label(r.op[s3.index("(1 2)"), s3.index("(1 3)")]) == "(2 3)"
    z5 = conjugation_rack(cyclic_group(5))
    assert (z5.op == np.arange(5)[:, None]).all()
    z4 = conjugation_rack(cyclic_group(4), inversion_map(cyclic_group(4)))
    # kappa(y^{-1}) x y = y + x + y additively
    i = np.arange(4)
    assert (z4.op == (i[:, None] + 2 * i[None, :]) % 4).all()
    assert verify_skew_rack(z4) and verify_good_involution(z4)


def test_product_rack_formula():
    r = product_rack(cyclic_group(3))
    assert r.op[1 * 3 + 2, 0 * 3 + 1] == 2 * 3 + 2


@pytest.mark.slow
def test_sl2_product_rack_axioms():
    r = product_rack(sl2_group(3))
    assert r.size == 576
    assert verify_skew_rack(r) and verify_good_involution(r)


def test_pair_rack_matches_dense():
    k = symmetric_group(3)
    dense = product_rack(k)
    lazy = product_rack(k, dense=False)
    a, b = np.meshgrid(np.arange(36), np.arange(36), indexing="ij")
    assert (np.asarray(lazy.apply(a, b)) == dense.op).all()
    assert (np.asarray(lazy.apply_inv(a, b)) == dense.op_inv).all()
    assert (lazy.kappa == dense.kappa).all() and (lazy.rho == dense.rho).all()


def test_non_involution_rejected():
    with pytest.raises(PreconditionError):
        product_rack(cyclic_group(5), power_hom(cyclic_group(5), 2))


# -- delta construction ---------------------------------------------------------------


def test_delta_identity_rejected():
    s3 = symmetric_group(3)
    with pytest.raises(PreconditionError):
        delta_rack(s3, identity_hom(s3), np.arange(6))


def test_delta_homomorphism_example():
    z2 = cyclic_group(2)
    g = direct_product(z2, z2)
    delta = np.array([b * 2 for a in range(2) for b in range(2)])
    rack, cert = delta_rack(g, identity_hom(g), delta, rho=np.arange(4))
    assert cert.certified and cert.f_link_certified
    assert check_property_fr(rack) and check_f_link_homotopic(rack)


def test_twisted_conjugacy_z4():
    z4 = cyclic_group(4)
    d = twisted_conjugacy_delta(z4, inversion_map(z4))
    assert d.tolist() == [0, 2, 0, 2]
    rack, cert = delta_rack(z4, inversion_map(z4), d)
    assert cert.image == (0, 2) and cert.fiber_sizes == (2, 2)
    assert cert.certified
    assert check_property_fr(rack)


def test_twisted_conjugacy_identity_is_constant():
    s3 = symmetric_group(3)
    assert set(twisted_conjugacy_delta(s3, identity_hom(s3)).tolist()) == {s3.identity}


def test_twisted_conjugacy_s3_conjugation():
    s3 = symmetric_group(3)
    f = conjugation_hom(s3, s3.index("(1 2)"))
    d = twisted_conjugacy_delta(s3, f)
    fixed = [x for x in range(6) if f.map[x] == x]
    counts = np.bincount(d, minlength=6)
    assert set(counts[counts > 0].tolist()) == {len(fixed)}


def test_normal_pair_s3_a3():
    s3 = symmetric_group(3)
    rack, cert = normal_pair_rack(s3, alternating_elements(3))
    assert rack.size == 18
    assert len(cert.image) == 3 and cert.fiber_sizes == (6, 6, 6)
    assert verify_skew_rack(rack) and verify_good_involution(rack)


def test_normal_pair_full_equals_product():
    for k in (cyclic_group(3), symmetric_group(3)):
        a, _ = normal_pair_rack(k)
        b = product_rack(k)
        assert (a.op == b.op).all() and (a.kappa == b.kappa).all() and (a.rho == b.rho).all()


def test_normal_pair_rejects_non_normal():
    s3 = symmetric_group(3)
    with pytest.raises(PreconditionError):
        normal_pair_rack(s3, [s3.identity, s3.index("(1 2)")])


# -- cocycles ---------------------------------------------------------------------------


def named_cocycles():
    s3 = symmetric_group(3)
    out = [
        ("zero", zero_cocycle(product_rack(cyclic_group(3)), cyclic_coefficients(3))),
        ("carry3", carry_cocycle(3, 1)),
        ("carry3-", carry_cocycle(3, -1)),
        ("carry5", carry_cocycle(5, 1)),
        ("ext3", extension_cocycle(cyclic_group(3), None, None, np.arange(3), theta_prime(3, 1))),
    ]
    out += [(f"z2{k}", z2_cocycle(*k)) for k in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)]]
    return out


@pytest.mark.parametrize("name, phi", named_cocycles())
def test_named_cocycles_and_extension(name, phi):
    assert verify_birack_cocycle(phi)
    ext = extend_by_cocycle(phi)
    assert verify_skew_rack(ext)


def test_extension_of_carry_cocycle_size():
    ext = extend_by_cocycle(carry_cocycle(3, 1))
    assert ext.size == 27
    assert verify_skew_rack(ext) and verify_good_involution(ext)


def test_negated_fiber_breaks_sr1():
    ext = extend_by_cocycle(carry_cocycle(3, 1), negate_fiber=True)
    rep = verify_skew_rack(ext)
    assert not rep and rep.axiom == "SR1"


def _random_tables(rng, rack, mod, count):
    """Half uniform noise, half kappa-invariant coboundaries h(a◁b) - h(a)."""
    k = rack.kappa
    orbits = np.minimum(np.arange(rack.size), k)
    for i in range(count):
        if i % 2:
            h = rng.integers(0, mod, rack.size)[orbits]
            yield (h[rack.op] - h[:, None]) % mod
        else:
            yield rng.integers(0, mod, (rack.size, rack.size))


def test_extension_iff_on_random_tables():
    rng = np.random.default_rng(0)
    seen = {True: 0, False: 0}
    for rack, mod in [(product_rack(cyclic_group(3)), 3), (conjugation_rack(symmetric_group(3)), 2),
                      (product_rack(cyclic_group(2)), 4)]:
        for table in _random_tables(rng, rack, mod, 40):
            phi = BirackCocycle(rack, cyclic_coefficients(mod), table)
            is_cocycle = bool(verify_birack_cocycle(phi))
            assert bool(verify_skew_rack(extend_by_cocycle(phi))) == is_cocycle
            seen[is_cocycle] += 1
    assert seen[True] >= 50 and seen[False] >= 50


def test_perturbed_cocycle_extension_fails():
    phi = carry_cocycle(3, 1)
    table = phi.table.copy()
    table[4, 5, 0] = (table[4, 5, 0] + 1) % 3
    bad = BirackCocycle(phi.rack, phi.coeff, table)
    assert not verify_birack_cocycle(bad)
    assert verify_skew_rack(extend_by_cocycle(bad)).axiom in ("SR1", "SR3")


def test_symmetric_checks():
    assert verify_symmetric_cocycle(carry_cocycle(5, 1))
    assert verify_symmetric_cocycle(z2_cocycle(1, 1, 0))
    rep = verify_symmetric_cocycle(constant_cocycle(product_rack(cyclic_group(3)), 1, 3))
    assert not rep


def test_random_table_fails_with_witness():
    rng = np.random.default_rng(3)
    rack = product_rack(cyclic_group(3))
    phi = BirackCocycle(rack, cyclic_coefficients(3), rng.integers(0, 3, (9, 9)))
    rep = verify_birack_cocycle(phi)
    assert not rep and len(rep.counterexample) in (2, 3)


def test_symmetrize_zero():
    phi = zero_cocycle(product_rack(cyclic_group(3)), cyclic_coefficients(3))
    assert not symmetrize_cocycle(phi).table.any()


def test_symmetrize_rejects_with_witness():
    phi = constant_cocycle(product_rack(cyclic_group(3)), 1, 3)
    with pytest.raises(PreconditionError) as err:
        symmetrize_cocycle(phi)
    assert err.value.witness == (0, 0)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_carry_cocycle_is_symmetrized_extension(p):
    sym = symmetrize_cocycle(extension_cocycle(cyclic_group(p), None, None, np.arange(p), theta_prime(p, 1)))
    assert verify_symmetric_cocycle(sym)
    assert (sym.table == carry_cocycle(p, 1).table).all()


@pytest.mark.parametrize("p", [3, 5, 7])
def test_carry_cocycle_minus_is_symmetrized_extension(p):
    zp = cyclic_group(p)
    neg = neg_hom(p)
    lam = (-np.arange(p)) % p
    sym = symmetrize_cocycle(extension_cocycle(zp, None, neg, lam, theta_prime(p, 1)))
    assert (sym.table == carry_cocycle(p, -1).table).all()
    assert verify_birack_cocycle(carry_cocycle(p, -1)) and verify_symmetric_cocycle(carry_cocycle(p, -1))


def test_carry_cocycle_values():
    phi = carry_cocycle(3, 1)
    assert phi.table[1 * 3 + 1, 0 * 3 + 1, 0] == 1
    zero_x = [0 * 3 + y for y in range(3)]
    assert not phi.table[zero_x].any()


def test_aliases():
    assert prop28_cocycle is carry_cocycle and lhm8_cocycle is extension_cocycle


def test_extension_zero_theta():
    z3 = cyclic_group(3)
    zero = Group2Cocycle(z3, cyclic_coefficients(3), np.zeros((3, 3), int))
    assert not extension_cocycle(z3, None, None, np.arange(3), zero).table.any()


def _sign_theta_s3():
    """A normalized Z/2 two-cocycle on S3 that is not a coboundary, plus a coboundary."""
    s3 = symmetric_group(3)
    sign = np.array([0 if x in alternating_elements(3) else 1 for x in range(6)])
    rng = np.random.default_rng(1)
    h = rng.integers(0, 2, 6)
    h[s3.identity] = 0
    cob = (h[:, None] + h[None, :] - h[s3.mult]) % 2
    return s3, sign, (sign[:, None] * sign[None, :] + cob) % 2


def test_extension_cocycle_nonabelian_third_term():
    s3, sign, theta = _sign_theta_s3()
    th = Group2Cocycle(s3, cyclic_coefficients(2), theta)
    good = extension_cocycle(s3, None, None, sign, th)
    assert verify_birack_cocycle(good)
    printed = extension_cocycle(s3, None, None, sign, th, theta_zw=True)
    assert not verify_birack_cocycle(printed)


def test_z2_values():
    phi = z2_cocycle(1, 0, 0)
    assert all(phi.table[x * 2 + 1, y, 0] == 1 for x in range(2) for y in range(4))
    assert not z2_cocycle(0, 0, 0).table.any()


def test_cocycle_json_roundtrip():
    phi = carry_cocycle(3, 1)
    import json

    back = BirackCocycle.from_json(json.loads(phi.dumps()), phi.rack)
    assert (back.table == phi.table).all() and back.dumps() == phi.dumps()
