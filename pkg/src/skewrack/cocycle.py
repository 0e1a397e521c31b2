"""Birack 2-cocycles on finite skew-racks."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .groups import FiniteAbelianGroup
from .rack import FiniteSkewRack, _require_dense
from .report import CheckReport, PreconditionError, StructureError


@dataclass(frozen=True, eq=False)
class BirackCocycle:
    """phi: X x X -> A stored as an (n, n, k) array of residues."""

    rack: FiniteSkewRack
    coeff: FiniteAbelianGroup
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        n = self.rack.size
        if t.ndim == 2:
            t = t[:, :, None]
        if t.shape != (n, n, self.coeff.rank):
            raise StructureError(f"cocycle table must have shape {(n, n, self.coeff.rank)}, got {t.shape}")
        t = self.coeff.reduce(t)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def codes(self) -> np.ndarray:
        """Table entries as mixed-radix integer codes, shape (n, n)."""
        return self.coeff.encode(self.table)

    def __call__(self, a, b):
        return self.table[a, b]

    def to_json(self) -> dict:
        return {"coeff": list(self.coeff.torsion), "table": self.table.tolist()}

    @classmethod
    def from_json(cls, data: dict, rack: FiniteSkewRack) -> "BirackCocycle":
        try:
            return cls(rack, FiniteAbelianGroup(tuple(data["coeff"])), np.array(data["table"]))
        except KeyError as exc:
            raise StructureError(f"cocycle JSON is missing {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def zero_cocycle(rack: FiniteSkewRack, coeff: FiniteAbelianGroup) -> BirackCocycle:
    return BirackCocycle(rack, coeff, np.zeros((rack.size, rack.size, coeff.rank), dtype=np.int64))


def verify_birack_cocycle(phi: BirackCocycle) -> CheckReport:
    """phi(a,b) + phi(a◁b,c) = phi(a,κc) + phi(a◁κc, b◁c) and phi(b,c) = phi(κb,κc)."""
    X = _require_dense(phi.rack)
    op, k, t, A = X.op, X.kappa, phi.table, phi.coeff
    n = X.size
    for a in range(n):
        lhs = t[a][:, None, :] + t[op[a]]  # (b, c)
        ak = op[a, k]  # a◁κc over c
        rhs = t[a, k][None, :, :] + t[ak[None, :], op]
        bad = np.argwhere(A.reduce(lhs - rhs).any(-1))
        if bad.size:
            b, c = bad[0]
            return CheckReport.fail("cocycle", (a, int(b), int(c)),
                                    "phi(a,b)+phi(a◁b,c) != phi(a,κc)+phi(a◁κc,b◁c)")
    bad = np.argwhere((t != t[k[:, None], k[None, :]]).any(-1))
    if bad.size:
        b, c = bad[0]
        return CheckReport.fail("kappa-invariance", (int(b), int(c)), "phi(b,c) != phi(κb,κc)")
    return CheckReport.ok()


def verify_symmetric_cocycle(phi: BirackCocycle) -> CheckReport:
    """phi(a,b) = -phi(a◁b, ρb) = -phi(ρa, κb) for all pairs."""
    X = _require_dense(phi.rack)
    if X.rho is None:
        raise StructureError("rack has no involution rho")
    op, k, r, t, A = X.op, X.kappa, X.rho, phi.table, phi.coeff
    other = t[op, r[None, :]]
    bad = np.argwhere(A.reduce(t + other).any(-1))
    if bad.size:
        a, b = bad[0]
        return CheckReport.fail("symmetric-1", (int(a), int(b)), "phi(a,b) != -phi(a◁b, rho(b))")
    other = t[r[:, None], k[None, :]]
    bad = np.argwhere(A.reduce(t + other).any(-1))
    if bad.size:
        a, b = bad[0]
        return CheckReport.fail("symmetric-2", (int(a), int(b)), "phi(a,b) != -phi(rho(a), kappa(b))")
    return CheckReport.ok()


def extend_by_cocycle(phi: BirackCocycle, negate_fiber: bool = False) -> FiniteSkewRack:
    """The rack on X x A with (x,a)◁(y,b) = (x◁y, a + phi(x,y)).

    The fiber is carried along unchanged by the involution, (x,a) ↦ (κx, a),
    which makes the result a skew-rack exactly when phi is a birack 2-cocycle.
    ``negate_fiber=True`` uses (κx, -a) instead; with that involution SR1
    forces phi(κx,κy) = -phi(x,y), so the equivalence breaks.
    Element (x, a) has index ``x*|A| + code(a)``.
    """
    X = _require_dense(phi.rack)
    A = phi.coeff
    na = A.size
    n = X.size
    total = n * na
    elems = A.decode(np.arange(na))  # (na, k)
    x, c = np.divmod(np.arange(total), na)
    fiber = A.reduce(elems[c][:, None, :] + phi.table[x[:, None], np.arange(n)[None, :]])  # (total, n, k)
    op_small = X.op[x[:, None], x[None, :]]  # (total, total) via y = x
    fiber_codes = A.encode(fiber)  # (total, n)
    op = op_small * na + fiber_codes[:, x]
    neg = A.encode(A.reduce(-elems))
    kappa = X.kappa[x] * na + (neg[c] if negate_fiber else c)
    # (ρx, -a) is a good involution exactly when phi is symmetric
    rho = None if X.rho is None else X.rho[x] * na + neg[c]
    return FiniteSkewRack(op, kappa, rho=rho, name=f"{X.name}~{A.torsion}")


def symmetrize_cocycle(phi: BirackCocycle) -> BirackCocycle:
    """phi(a,b) - phi(a◁b, ρb); requires phi(a,b) = -phi(ρa, κb)."""
    X = _require_dense(phi.rack)
    if X.rho is None:
        raise StructureError("rack has no involution rho")
    op, k, r, t, A = X.op, X.kappa, X.rho, phi.table, phi.coeff
    bad = np.argwhere(A.reduce(t + t[r[:, None], k[None, :]]).any(-1))
    if bad.size:
        a, b = bad[0]
        raise PreconditionError("phi(a,b) != -phi(rho(a), kappa(b))", (int(a), int(b)))
    return BirackCocycle(X, A, A.reduce(t - t[op, r[None, :]]))
