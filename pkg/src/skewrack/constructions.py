"""Named skew-racks and cocycles built from groups."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cocycle import BirackCocycle
from .groups import (
    FiniteAbelianGroup,
    FiniteGroup,
    Group1Cocycle,
    Group2Cocycle,
    GroupHom,
    cyclic_coefficients,
    cyclic_group,
    direct_product,
    identity_hom,
    theta_prime,
    verify_group_1cocycle,
    verify_group_2cocycle,
    verify_involutive_automorphism,
)
from .rack import FiniteSkewRack, PairRack, verify_good_involution
from .report import CheckReport, PreconditionError

# product racks above this many elements use the implicit PairRack
DENSE_LIMIT = 20_000


def _involution_or_raise(f: GroupHom, what: str = "f") -> None:
    report = verify_involutive_automorphism(f)
    if not report:
        raise PreconditionError(f"{what} is not an involutive automorphism: {report.detail}", report.counterexample)


def conjugation_rack(g: FiniteGroup, kappa: Optional[GroupHom] = None) -> FiniteSkewRack:
    """x◁y = kappa(y^{-1}) x y with rho(x) = x^{-1}."""
    kappa = kappa or identity_hom(g)
    _involution_or_raise(kappa, "kappa")
    k, m, inv = kappa.map, g.mult, g.inv
    op = m[m[k[inv][None, :], np.arange(g.size)[:, None]], np.arange(g.size)[None, :]]
    return FiniteSkewRack(op, k, rho=inv, name=f"conj({g.name})")


def product_rack(k: FiniteGroup, f: Optional[GroupHom] = None, dense: Optional[bool] = None):
    """(x,a)◁(y,b) = (f(x) y^{-1} b y, f(a)) on K x K, with (x,a) at index x*|K| + a.

    kappa = f x f and rho(x,a) = (f(x), f(a)^{-1}).  Returns a dense
    :class:`FiniteSkewRack` unless the rack is larger than ``DENSE_LIMIT``
    (or ``dense=False``), in which case an implicit :class:`PairRack`.
    """
    f = f or identity_hom(k)
    _involution_or_raise(f)
    n = k.size
    name = f"product({k.name})"
    if dense is None:
        dense = n * n <= DENSE_LIMIT
    if not dense:
        return PairRack(k, f.map, name=name)
    fm = f.map.astype(np.int64)
    m = k.mult.astype(np.int64)
    inv = k.inv.astype(np.int64)
    y = np.arange(n)
    conj = m[m[inv[y][:, None], y[None, :]], y[:, None]].ravel()  # index y*n + b
    first = m[fm[:, None], conj[None, :]]  # (x, (y,b))
    size = n * n
    dt = np.int16 if size <= np.iinfo(np.int16).max else np.int32
    op = np.empty((n, n, size), dtype=dt)
    op[...] = (first * n)[:, None, :].astype(dt)
    op += fm.astype(dt)[None, :, None]
    op = op.reshape(size, size)
    x, a = np.divmod(np.arange(size), n)
    kappa = fm[x] * n + fm[a]
    rho = fm[x] * n + inv[fm[a]]
    # inverse: (z,c)◁^{-1}(y,b) = (f(z (y^{-1}by)^{-1}), f(c))
    second = fm[m[y[:, None], inv[conj][None, :]]]
    op_inv = np.empty((n, n, size), dtype=dt)
    op_inv[...] = (second * n)[:, None, :].astype(dt)
    op_inv += fm.astype(dt)[None, :, None]
    op_inv = op_inv.reshape(size, size)
    return FiniteSkewRack(op, kappa, rho=rho, name=name, op_inv=op_inv)


@dataclass(frozen=True)
class DeltaCertificate:
    """Outcome of the checks that make x◁y = kappa(x)delta(y) a rack with Property FR."""

    equation: CheckReport
    image: tuple
    image_is_subgroup: bool
    fiber_sizes: tuple
    image_commutative: bool
    rho_label: Optional[str] = None
    notes: tuple = field(default_factory=tuple)

    @property
    def equal_fibers(self) -> bool:
        return len(set(self.fiber_sizes)) == 1

    @property
    def certified(self) -> bool:
        """Conditions for Property FR: the identity, a subgroup image, equal fibers and a good involution."""
        return bool(self.equation) and self.image_is_subgroup and self.equal_fibers and self.rho_label is not None

    @property
    def f_link_certified(self) -> bool:
        return self.certified and self.image_commutative

    def report(self) -> CheckReport:
        if not self.equation:
            return self.equation
        if not self.image_is_subgroup:
            return CheckReport.fail("image-subgroup", self.image, "Im(delta) is not a subgroup")
        if not self.equal_fibers:
            return CheckReport.fail("fibers", self.fiber_sizes, "fibers of delta have different sizes")
        if self.rho_label is None:
            return CheckReport.fail("good-involution", (), "no good involution among the candidates")
        return CheckReport.ok(f"|Im| = {len(self.image)}, fibers {self.fiber_sizes[0]}, "
                              f"commutative image: {self.image_commutative}, rho = {self.rho_label}")


def _check_delta_equation(g: FiniteGroup, delta: np.ndarray) -> CheckReport:
    """delta(x)delta(y) = delta(y)delta(x delta(y)) for all x, y."""
    m = g.mult
    dx = delta[:, None]
    dy = delta[None, :]
    lhs = m[dx, dy]
    rhs = m[dy, delta[m[np.arange(g.size)[:, None], dy]]]
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        x, y = bad[0]
        return CheckReport.fail("delta-equation", (int(x), int(y)),
                                "delta(x)delta(y) != delta(y)delta(x delta(y))")
    return CheckReport.ok()


def delta_rack(g: FiniteGroup, kappa: GroupHom, delta, rho=None, name: str = ""):
    """The rack x◁y = kappa(x)delta(y) together with its certificate.

    When ``rho`` is omitted the good involution is searched among
    identity, inversion, kappa and kappa∘inversion.
    """
    _involution_or_raise(kappa, "kappa")
    delta = np.asarray(delta, dtype=np.int64)
    if delta.shape != (g.size,) or delta.min() < 0 or delta.max() >= g.size:
        raise PreconditionError("delta must map the group into itself")
    k = kappa.map.astype(np.int64)
    bad = np.flatnonzero(k[delta] != delta[k])
    if bad.size:
        raise PreconditionError("kappa and delta do not commute", (int(bad[0]),))
    equation = _check_delta_equation(g, delta)
    if not equation:
        raise PreconditionError(f"delta rejected: {equation.detail}", equation.counterexample)
    op = g.mult[k[:, None], delta[None, :]]
    image = tuple(int(v) for v in np.unique(delta))
    subgroup = g.is_subgroup(image)
    fibers = tuple(int(c) for c in np.bincount(delta, minlength=g.size)[list(image)])
    sub = np.array(image)
    commutative = bool(np.array_equal(g.mult[np.ix_(sub, sub)], g.mult[np.ix_(sub, sub)].T))
    if rho is not None:
        candidates = [("given", np.asarray(rho))]
    else:
        inv = g.inv.astype(np.int64)
        candidates = [("identity", np.arange(g.size)), ("inverse", inv), ("kappa", k), ("kappa-inverse", k[inv])]
    rho_label, rack = None, None
    for label, r in candidates:
        trial = FiniteSkewRack(op, k, rho=r, name=name or f"delta({g.name})")
        if verify_good_involution(trial):
            rho_label, rack = label, trial
            break
    if rack is None:
        rack = FiniteSkewRack(op, k, name=name or f"delta({g.name})")
    cert = DeltaCertificate(equation, image, subgroup, fibers, commutative, rho_label)
    return rack, cert


def twisted_conjugacy_delta(g: FiniteGroup, f: GroupHom) -> np.ndarray:
    """delta(x) = f(x^{-1}) x; its fibers are cosets of Fix(f)."""
    _involution_or_raise(f)
    x = np.arange(g.size)
    delta = g.mult[f.map[g.inv], x]
    fix = int(np.count_nonzero(f.map == x))
    counts = np.bincount(delta, minlength=g.size)
    if set(counts[counts > 0].tolist()) != {fix}:
        raise PreconditionError("fibers of f(x^{-1})x are not all of size |Fix(f)|")
    return delta


def normal_pair_group(k: FiniteGroup, n_elements: Sequence[int]) -> tuple[FiniteGroup, FiniteGroup]:
    """(N as a group, K x N); element (x, a) of K x N sits at ``x*|N| + pos(a)``."""
    if not k.is_normal(n_elements):
        raise PreconditionError("N is not a normal subgroup of K")
    n_group = k.subgroup(list(n_elements), name="N")
    return n_group, direct_product(k, n_group)


def normal_pair_rack(k: FiniteGroup, n_elements: Optional[Sequence[int]] = None, f: Optional[GroupHom] = None):
    """K x N with (x,a)◁(z,w) = (f(x) z^{-1} w z, f(a)) and rho(x,a) = (f(x), f(a)^{-1}).

    Returns ``(rack, certificate)``.  Elements of N are given as indices into
    K (defaults to all of K); (x, a) has index ``x*|N| + position of a``.
    """
    f = f or identity_hom(k)
    _involution_or_raise(f)
    n_elements = list(range(k.size)) if n_elements is None else [int(e) for e in n_elements]
    fm = f.map
    if not set(fm[n_elements].tolist()) <= set(n_elements):
        raise PreconditionError("f does not preserve N")
    n_group, g = normal_pair_group(k, n_elements)
    nn = len(n_elements)
    pos = {e: i for i, e in enumerate(n_elements)}
    n_to_k = np.array(n_elements)
    f_on_n = np.array([pos[int(fm[e])] for e in n_elements])
    x, a = np.divmod(np.arange(g.size), nn)
    kappa = GroupHom(g, g, fm[x] * nn + f_on_n[a])
    m = k.mult
    conj_in_k = m[m[k.inv[x], n_to_k[a]], x]  # x^{-1} a x in K
    delta = conj_in_k * nn + pos[k.identity]
    rho = fm[x] * nn + n_group.inv[f_on_n[a]]
    rack, cert = delta_rack(g, kappa, delta, rho=rho, name=f"normal_pair({k.name},{len(n_elements)})")
    return rack, cert


def _lambda_values(lam, n_group: FiniteGroup, coeff: FiniteAbelianGroup) -> np.ndarray:
    if isinstance(lam, Group1Cocycle):
        report = verify_group_1cocycle(lam)
        if not report:
            raise PreconditionError(f"lambda rejected: {report.detail}", report.counterexample)
        return lam.values[:, 0]
    vals = np.asarray(lam, dtype=np.int64)
    lam = Group1Cocycle(n_group, coeff, vals)
    return _lambda_values(lam, n_group, coeff)


def extension_cocycle(k: FiniteGroup, n_elements, f: Optional[GroupHom], lam, theta: Group2Cocycle,
                      theta_zw: bool = False) -> BirackCocycle:
    """lambda(y) * (θ(f(x), z^{-1}) + θ(f(x) z^{-1}, w z) + θ(w, z) - θ(z, z^{-1})).

    Defined on the normal-pair rack of (K, N, f) at ((x,y),(z,w)); this is the
    fiber coordinate of the rack operation on the central extension.  The
    coefficient group must be cyclic since lambda(y) multiplies.
    ``theta_zw=True`` uses θ(z, w) as the third term instead, which is not a
    cocycle in general when K is nonabelian.
    """
    f = f or identity_hom(k)
    report = verify_group_2cocycle(theta)
    if not report:
        raise PreconditionError(f"theta rejected: {report.detail}", report.counterexample)
    if theta.group.size != k.size:
        raise PreconditionError("theta lives on a different group")
    A = theta.coeff
    if not A.is_cyclic:
        raise PreconditionError("the coefficient group must be cyclic")
    mod = A.torsion[0]
    rack, _ = normal_pair_rack(k, n_elements, f)
    n_elements = list(range(k.size)) if n_elements is None else list(n_elements)
    n_group = k.subgroup(n_elements, name="N")
    lam_vals = _lambda_values(lam, n_group, A)
    nn = len(n_elements)
    n_to_k = np.array(n_elements)
    x, y = np.divmod(np.arange(rack.size), nn)
    z, w = x, n_to_k[y]
    m, inv, t = k.mult, k.inv, theta.table[:, :, 0]
    fx = f.map[x][:, None]
    zc, wc = z[None, :], w[None, :]
    fxz = m[fx, inv[zc]]
    last = t[zc, wc] if theta_zw else t[wc, zc]
    inner = t[fx, inv[zc]] + t[fxz, m[wc, zc]] + last - t[zc, inv[zc]]
    table = (lam_vals[y][:, None] * inner) % mod
    return BirackCocycle(rack, A, table)


def carry_cocycle(p: int, eps: int = 1) -> BirackCocycle:
    """2·y·θ_eps(x, w) on the normal-pair rack of Z/p with f(x) = eps·x.

    θ_eps(x, y) = ((x + eps·y)^p - x^p - (eps·y)^p)/p mod p.
    """
    theta = theta_prime(p, eps)
    zp = cyclic_group(p)
    f = GroupHom(zp, zp, (eps * np.arange(p)) % p)
    rack, _ = normal_pair_rack(zp, None, f)
    x, y = np.divmod(np.arange(p * p), p)
    t = theta.table[:, :, 0]
    table = (2 * y[:, None] * t[x[:, None], y[None, :]]) % p
    return BirackCocycle(rack, cyclic_coefficients(p), table)


def z2_cocycle(k1: int, k2: int, k3: int) -> BirackCocycle:
    """k1·a + k2·b + k3·a·b at ((x,a),(y,b)) on the product rack of Z/2."""
    rack = product_rack(cyclic_group(2))
    _, a = np.divmod(np.arange(4), 2)
    table = (k1 * a[:, None] + k2 * a[None, :] + k3 * a[:, None] * a[None, :]) % 2
    return BirackCocycle(rack, cyclic_coefficients(2), table)


def constant_cocycle(rack: FiniteSkewRack, value: int, modulus: int) -> BirackCocycle:
    return BirackCocycle(rack, cyclic_coefficients(modulus), np.full((rack.size, rack.size), value))


# names used by the command line and elsewhere
prop28_cocycle = carry_cocycle
lhm8_cocycle = extension_cocycle
