"""Command-line front end: JSON in, JSON report out, four-valued exit status.

Exit codes: 0 pass/success, 1 definite failure (failed invariance, surviving
mixed cumulant, refuted membership), 2 inconclusive (bounded search exhausted
without refutation), 3 input error.  A report is written in every case.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import algebra, cumulants, independence, symmetry
from .cumulants import Kind, MomentFunctional, cumulants_from_moments, moments_from_cumulants
from .partitions import enumerate_partitions, format_partition, parse_family, parse_partition

PASS, FAIL, INCONCLUSIVE, INPUT_ERROR = 0, 1, 2, 3


def _parse_tol(text: str) -> Fraction:
    return Fraction(text)


def _write_report(report: dict, out_path: str | None) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)


def _load_moments(path: str) -> MomentFunctional:
    table = cumulants.load_table(path)
    if not isinstance(table, MomentFunctional):
        raise ValueError("expected a moment table (kind 'moment')")
    return table


def _cmd_partitions(args) -> tuple[int, dict]:
    family = parse_family(args.family)
    parts = enumerate_partitions(args.k, family)
    return PASS, {
        "k": args.k,
        "family": family.short_name(),
        "count": len(parts),
        "partitions": [format_partition(p) for p in parts],
    }


def _cmd_transform(args) -> tuple[int, dict]:
    kind = Kind(args.kind)
    table = cumulants.load_table(args.input)
    if args.direction == "m2c":
        if not isinstance(table, MomentFunctional):
            raise ValueError("m2c expects a moment table")
        result = cumulants_from_moments(table, kind)
    else:
        if not isinstance(table, cumulants.CumulantTable):
            raise ValueError("c2m expects a cumulant table")
        if table.kind is not kind:
            raise ValueError(f"table kind {table.kind.value} does not match --kind {kind.value}")
        result = moments_from_cumulants(table)
    return PASS, result.to_json()


def _cmd_independence(args) -> tuple[int, dict]:
    kind = Kind(args.kind)
    mom = _load_moments(args.input)
    report = independence.test_mixed_vanishing(mom, kind, _parse_tol(args.tol))
    return (PASS if report.passed else FAIL), report.to_json()


def _cmd_symmetry(args) -> tuple[int, dict]:
    mom = _load_moments(args.input)
    if args.schema:
        schema = algebra.parse_schema(args.schema)
        report = symmetry.quantum_invariance_certificate(
            mom, schema, args.n, args.K or mom.max_order, args.D, extension=args.extension)
        if report.all_certified:
            return PASS, report.to_json()
        return (FAIL if report.refuted else INCONCLUSIVE), report.to_json()
    family = symmetry.GroupFamily(args.group)
    tag = symmetry.GroupTag(family, args.n)
    if family in (symmetry.GroupFamily.SYM, symmetry.GroupFamily.HYPEROCT):
        report = symmetry.check_invariance_exact(mom, tag, args.K, extension=args.extension)
    else:
        if args.seed is None:
            raise ValueError("--seed is required for Monte Carlo groups")
        report = symmetry.check_invariance_mc(
            mom, tag, args.K, samples=args.samples, seed=args.seed,
            tol=_parse_tol(args.tol), extension=args.extension)
    return (PASS if report.passed else FAIL), report.to_json()


def _cmd_verify(args) -> tuple[int, dict]:
    schema = algebra.parse_schema(args.schema)
    n, D = args.n, args.D
    if args.coproduct:
        report = algebra.verify_coproduct(schema, n, D)
        return (PASS if report.all_certified else INCONCLUSIVE), report.to_json()
    if args.implies:
        other = algebra.parse_schema(args.implies)
        report = algebra.verify_schema_implication(schema, other, n, D)
        return (PASS if report.all_certified else INCONCLUSIVE), report.to_json()
    if args.lemma == "vanishing":
        if args.pi is None or args.j is None:
            raise ValueError("--lemma vanishing requires --pi and --j")
        jword = tuple(int(t) for t in args.j.split())
        pi = parse_partition(args.pi, ground_size=len(jword))
        family = parse_family(args.family) if args.family else _default_family(schema)
        item = algebra.verify_vanishing(schema, family, n, pi, jword, D)
        payload = {
            "label": item.label,
            "target": algebra.format_sum(item.target),
            "certified": item.certified,
            "certificate": item.certificate.to_json() if item.certificate else None,
        }
        if item.certified:
            return PASS, payload
        hit = algebra.refute_membership(
            item.target, algebra.instantiate_relations(schema, n),
            algebra.schema_sample_assignments(schema, n))
        payload["refuted"] = hit is not None
        return (FAIL if hit is not None else INCONCLUSIVE), payload
    if args.target:
        gens = schema.generator_set(n)
        target = algebra.parse_sum(gens, args.target)
        relations = algebra.instantiate_relations(schema, n)
        cert = algebra.ideal_membership(target, relations, D)
        payload = {"target": algebra.format_sum(target), "certified": cert is not None,
                   "certificate": cert.to_json() if cert else None}
        if cert is not None:
            return PASS, payload
        hit = algebra.refute_membership(target, relations,
                                        algebra.schema_sample_assignments(schema, n))
        payload["refuted"] = hit is not None
        return (FAIL if hit is not None else INCONCLUSIVE), payload
    raise ValueError("verify needs one of --coproduct, --implies, --lemma, --target")


_SCHEMA_FAMILY = {
    algebra.RelationSchema.P_ORTHOGONAL: "i2",
    algebra.RelationSchema.P_MAGIC: "i",
    algebra.RelationSchema.P_CUBIC: "ih",
    algebra.RelationSchema.P_BISTOCHASTIC: "ib",
}


def _default_family(schema: algebra.RelationSchema):
    if schema not in _SCHEMA_FAMILY:
        raise ValueError("--family is required for this schema")
    return parse_family(_SCHEMA_FAMILY[schema])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncprob")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap; results do not depend on it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", help="enumerate a partition family")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", default="p")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_partitions)

    p = sub.add_parser("transform", help="moment <-> cumulant transforms")
    p.add_argument("--kind", choices=[k.value for k in Kind], required=True)
    p.add_argument("--direction", choices=["m2c", "c2m"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("independence", help="mixed-cumulant vanishing test")
    p.add_argument("--kind", choices=[k.value for k in Kind], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tol", default="0")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_independence)

    p = sub.add_parser("symmetry", help="invariance checks")
    p.add_argument("--group", choices=[g.value for g in symmetry.GroupFamily])
    p.add_argument("--schema", help="quantum schema instead of a classical group")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--D", "--degree", dest="D", type=int, default=4)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", default="0")
    p.add_argument("--extension", type=int, default=0)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_symmetry)

    p = sub.add_parser("verify", help="algebraic certificates")
    p.add_argument("--schema", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--D", "--degree", dest="D", type=int, default=4)
    p.add_argument("--coproduct", action="store_true")
    p.add_argument("--implies", help="certify this schema's relations inside --schema")
    p.add_argument("--lemma", choices=["vanishing"])
    p.add_argument("--family")
    p.add_argument("--pi", help="partition in '1 2|3' text form")
    p.add_argument("--j", help="index word, space separated")
    p.add_argument("--target", help="formal sum in the documented grammar")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, report = args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        _write_report({"error": str(exc)}, getattr(args, "out", None))
        return INPUT_ERROR
    _write_report(report, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
