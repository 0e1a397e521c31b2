"""Command-line front end: ``skewrack <command> ...``.

Racks and cocycles are named by a small grammar::

    product:K=<group>,f=id|inv      normal_pair:K=<group>,N=<subgroup>,f=id|inv
    conj:K=<group>,kappa=id|inv     prop28:p=<prime>,eps=±1
    z2:k1,k2,k3                     const:<value>,<modulus>   (cocycle only)
    file:<path>

with ``<group>`` one of ``cyclic:m``, ``sym:k``, ``sl2p:p`` and a subgroup
additionally allowed to be ``alt:k`` or ``trivial``.  Output is JSON with
sorted keys, or a one-row CSV.  Exit status is 2 for unusable input, 1 for a
failed check or an obstruction verdict, 0 otherwise.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional

import numpy as np

from . import braid as br
from .cocycle import BirackCocycle
from .coloring import DEFAULT_BUDGET, count_colorings
from .constructions import (carry_cocycle, conjugation_rack, constant_cocycle, normal_pair_rack,
                            product_rack, z2_cocycle)
from .groups import (FiniteGroup, alternating_elements, cyclic_group, identity_hom, inversion_map,
                     sl2_group, symmetric_group)
from .homology import smith_normal_form
from .invariants import (OBSTRUCTED, check_cocycle_f_link, check_cocycle_property_fr, check_fr_invariance,
                         criterion_count, criterion_weight, format_fraction, weight_polynomial)
from .rack import FiniteSkewRack, ann, check_property_fr, tw_map, verify_good_involution, verify_skew_rack
from .report import BudgetExceeded, CheckReport, InnEvenOverflow, PreconditionError, StructureError

LONG_P = 7


class SpecError(ValueError):
    pass


# -- grammar ------------------------------------------------------------------------


def _split(spec: str) -> tuple[str, str]:
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise SpecError(f"missing ':' in {spec!r}")
    return kind.strip(), rest.strip()


def _params(rest: str) -> dict:
    """``K=cyclic:3,N=alt:3,f=id`` -> dict; values may contain ':'."""
    out = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise SpecError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SpecError(f"{what} must be an integer, got {text!r}") from None


def parse_group(spec: str) -> FiniteGroup:
    kind, arg = _split(spec)
    builders = {"cyclic": cyclic_group, "sym": symmetric_group, "sl2p": sl2_group}
    if kind not in builders:
        raise SpecError(f"unknown group {kind!r}")
    return builders[kind](_int(arg, kind))


def parse_subgroup(k: FiniteGroup, k_spec: str, n_spec: str) -> Optional[list]:
    """Element indices of N inside K, or None for N = K."""
    if n_spec == k_spec:
        return None
    if n_spec == "trivial":
        return [k.identity]
    kind, arg = _split(n_spec)
    k_kind, k_arg = _split(k_spec)
    if kind == "alt" and k_kind == "sym" and arg == k_arg:
        return alternating_elements(_int(arg, "alt"))
    if kind == "cyclic" and k_kind == "cyclic":
        m, d = _int(k_arg, "cyclic"), _int(arg, "cyclic")
        if d >= 1 and m % d == 0:
            return list(range(0, m, m // d))
    raise SpecError(f"cannot place {n_spec!r} inside {k_spec!r}")


def _hom(k: FiniteGroup, name: str):
    if name == "id":
        return identity_hom(k)
    if name in ("inv", "neg"):
        return inversion_map(k)
    raise SpecError(f"unknown automorphism {name!r}")


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None


def parse_rack(spec: str):
    kind, rest = _split(spec)
    if kind == "file":
        data = _read_json(rest)
        return FiniteSkewRack.from_json(data.get("rack", data))
    if kind == "prop28":
        return parse_cocycle(spec).rack
    if kind == "z2":
        return product_rack(cyclic_group(2))
    if kind not in ("product", "normal_pair", "conj"):
        raise SpecError(f"unknown rack {kind!r}")
    p = _params(rest)
    if "K" not in p:
        raise SpecError(f"{kind} needs K=<group>")
    k = parse_group(p["K"])
    if kind == "product":
        return product_rack(k, _hom(k, p.get("f", "id")))
    if kind == "normal_pair":
        n = parse_subgroup(k, p["K"], p.get("N", p["K"]))
        return normal_pair_rack(k, n, _hom(k, p.get("f", "id")))[0]
    return conjugation_rack(k, _hom(k, p.get("kappa", "id")))


def parse_cocycle(spec: str, rack=None) -> BirackCocycle:
    kind, rest = _split(spec)
    if kind == "prop28":
        p = _params(rest)
        try:
            return carry_cocycle(_int(p["p"], "p"), _int(p.get("eps", "1"), "eps"))
        except KeyError:
            raise SpecError("prop28 needs p=<prime>") from None
    if kind == "z2":
        ks = [_int(v, "z2 coefficient") for v in rest.split(",")]
        if len(ks) != 3:
            raise SpecError("z2 needs three coefficients k1,k2,k3")
        return z2_cocycle(*ks)
    if kind == "const":
        vals = [_int(v, "const") for v in rest.split(",")]
        if len(vals) != 2 or rack is None:
            raise SpecError("const:<value>,<modulus> needs --rack")
        return constant_cocycle(rack, *vals)
    if kind == "file":
        data = _read_json(rest)
        if "rack" in data:
            rack = FiniteSkewRack.from_json(data["rack"])
        if rack is None:
            raise SpecError("cocycle file has no rack; pass --rack")
        return BirackCocycle.from_json(data, rack)
    raise SpecError(f"unknown cocycle {kind!r}")


def _rack_and_cocycle(args):
    rack = parse_rack(args.rack) if getattr(args, "rack", None) else None
    phi = parse_cocycle(args.cocycle, rack) if getattr(args, "cocycle", None) else None
    if phi is not None:
        if rack is not None and rack.size != phi.rack.size:
            raise SpecError("cocycle and rack sizes differ")
        rack = phi.rack
    if rack is None:
        raise SpecError("no rack given")
    return rack, phi


def _braid(text: str) -> br.FramedBraid:
    try:
        return br.parse_braid(text)
    except br.BraidParseError as exc:
        raise SpecError(str(exc)) from None


# -- commands -----------------------------------------------------------------------


def _count_block(rack, b, threads: int, budget: int) -> dict:
    count = count_colorings(rack, b, budget, threads)
    m = ann(rack).size
    c = br.closure_stats(b).count
    return {"count": count, "ann": m, "components": c,
            "normalized": format_fraction(Fraction(count, m ** c)) if m else None}


def cmd_verify(args):
    rack = parse_rack(args.rack)
    reports = {"skew_rack": verify_skew_rack(rack)}
    if rack.rho is not None:
        reports["good_involution"] = verify_good_involution(rack)
    if reports["skew_rack"] and rack.kappa_involutive:
        tw = tw_map(rack)
        inv = rack.apply(rack.kappa, np.arange(rack.size))
        bad = np.flatnonzero(tw[inv] != np.arange(rack.size))
        reports["twist"] = CheckReport.fail("twist", (int(bad[0]),)) if bad.size else CheckReport.ok()
    ok = all(reports.values())
    return {"size": rack.size, "passed": ok, "reports": {k: v.to_dict() for k, v in reports.items()}}, ok


def cmd_property_fr(args):
    rack = parse_rack(args.rack)
    rep = check_property_fr(rack, n_max=args.depth, budget=args.budget, seed=args.seed)
    return {"size": rack.size, "depth": args.depth, "ann": int(ann(rack).size), **rep.to_dict()}, bool(rep)


def cmd_color(args):
    rack = parse_rack(args.rack)
    b = _braid(args.braid)
    out = _count_block(rack, b, args.threads, args.budget)
    if args.normalized and out["normalized"] is None:
        raise PreconditionError("Ann(X) is empty; the count cannot be normalized")
    return out, True


def cmd_invariant(args):
    _, phi = _rack_and_cocycle(args)
    if phi is None:
        raise SpecError("invariant needs --cocycle")
    poly = weight_polynomial(phi, _braid(args.braid), args.budget, args.threads)
    return {**poly.to_json(), "mass": format_fraction(poly.mass)}, True


def cmd_table1(args):
    sign = _sign(args.sign)
    if args.p >= LONG_P and not args.allow_long:
        raise PreconditionError(f"p >= {LONG_P} cells are long-running; pass --allow-long")
    rack = product_rack(sl2_group(args.p))
    b = br.build_torus2(args.n, sign)
    out = _count_block(rack, b, args.threads, args.budget)
    out.update(p=args.p, n=args.n, sign="+" if sign > 0 else "-")
    return out, True


def cmd_lens(args):
    spec = args.cocycle or f"prop28:p={args.p},eps=1"
    rack = parse_rack(args.rack) if args.rack else None
    phi = parse_cocycle(spec, rack)
    b = br.build_lens_chain(args.p, args.q)
    stats = br.closure_stats(b)
    poly = weight_polynomial(phi, b, args.budget, args.threads)
    return {
        "p": args.p, "q": args.q,
        "braid": br.serialize_braid(b),
        "framings": list(stats.framings),
        "divisors": list(smith_normal_form(stats.linking)),
        "count": count_colorings(phi.rack, b, args.budget, args.threads),
        "polynomial": poly.to_json(),
    }, True


def cmd_fr_test(args):
    rack, phi = _rack_and_cocycle(args)
    kw = dict(trials=args.trials, max_strands=args.max_strands, seed=args.seed,
              max_letters=args.max_letters, budget=args.budget)
    reports = {"count": check_fr_invariance(rack, **kw)}
    if phi is not None:
        reports["weight"] = check_cocycle_property_fr(phi, **kw)
        reports["f_link"] = check_cocycle_f_link(phi)
    ok = bool(reports["count"]) and (phi is None or bool(reports["weight"]))
    return {"passed": ok, "reports": {k: v.to_dict() for k, v in reports.items()}}, ok


def cmd_criterion(args):
    b = _braid(args.braid)
    if args.mode == "count":
        k = parse_group(args.K)
        n = parse_subgroup(k, args.K, args.N or args.K)
        ratio, verdict = criterion_count(k, n, b, args.budget)
        n_size = k.size if n is None else len(n)
        return {"mode": "count", "ratio": format_fraction(ratio), "N": n_size, "verdict": verdict}, verdict != OBSTRUCTED
    given = [args.k1, args.k2, args.k3]
    if any(v is not None for v in given):
        triples = [tuple(v or 0 for v in given)]
    else:
        triples = [(a, c, d) for a in (0, 1) for c in (0, 1) for d in (0, 1)]
    results = []
    for t in triples:
        poly, verdict = criterion_weight(b, *t, budget=args.budget)
        results.append({"k": list(t), "polynomial": poly.to_json(), "verdict": verdict})
    obstructed = any(r["verdict"] == OBSTRUCTED for r in results)
    return {"mode": "weight", "results": results, "verdict": OBSTRUCTED if obstructed else results[0]["verdict"]}, not obstructed


def _sign(text: str) -> int:
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise SpecError(f"sign must be + or -, got {text!r}")


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewrack", description="Skew-rack colorings of surgery diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        return p

    p = add("verify", cmd_verify, help="check the skew-rack axioms")
    p.add_argument("--rack", required=True)
    p = add("property-fr", cmd_property_fr, help="check Property FR")
    p.add_argument("--rack", required=True)
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(budget=200_000)
    p = add("color", cmd_color, help="count colorings of a closed braid")
    p.add_argument("--rack", required=True)
    p.add_argument("--braid", required=True)
    p.add_argument("--normalized", action="store_true")
    p = add("invariant", cmd_invariant, help="normalized weight polynomial")
    p.add_argument("--rack")
    p.add_argument("--cocycle", required=True)
    p.add_argument("--braid", required=True)
    p = add("table1", cmd_table1, help="one torus-knot cell over SL2(F_p)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sign", required=True)
    p.add_argument("--allow-long", action="store_true")
    p = add("lens", cmd_lens, help="weight polynomial of a lens-space chain")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--cocycle")
    p.add_argument("--rack")
    p = add("fr-test", cmd_fr_test, help="Fenn-Rourke invariance on random pairs")
    p.add_argument("--rack")
    p.add_argument("--cocycle")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--max-strands", type=int, default=3)
    p.add_argument("--max-letters", type=int, default=6)
    p = add("criterion", cmd_criterion, help="surgery obstruction criteria")
    p.add_argument("--mode", choices=("count", "weight"), required=True)
    p.add_argument("--braid", required=True)
    p.add_argument("--K", default="sym:3")
    p.add_argument("--N", default="alt:3")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--k3", type=int)
    return parser


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, sort_keys=True)
    buf = io.StringIO()
    keys = sorted(result)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    writer.writerow([v if isinstance(v, (int, str)) or v is None else json.dumps(v, sort_keys=True)
                     for v in (result[k] for k in keys)])
    return buf.getvalue().rstrip("\n")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, ok = args.func(args)
    except (SpecError, PreconditionError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, InnEvenOverflow) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 1
    print(render(result, args.format), file=stdout)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
