"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on usage or I/O errors.  JSON output is deterministic for a fixed seed;
wall-clock timings go to stderr so they never perturb it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable

from .laurent import fraction_str, substitute_monomials, reduce_pq
from .polyhedra import check_simple_and_facets, extract_flag_complex

BOUNDS = {"fan": 12, "matrix": 12, "uequations": 6, "binary": 5, "assoc": 5}
VERTEX_BOUND = 7
STAR_BOUND = 6
CHECKS = tuple(BOUNDS)


class UsageError(Exception):
    pass


# -- individual checks; each returns (passed, detail) ---------------------------

def _check_fan(d: int, seed: int) -> tuple[bool, dict]:
    from .pellytope import build_fan, build_pellytope, check_star, pell_number

    fan = build_fan(d)
    detail = {"rays": fan.n_rays, "maximal_cones": len(fan.maximal_cones),
              "expected_cones": pell_number(d + 1)}
    ok = fan.n_rays == 3 * d - 1 and len(fan.maximal_cones) == pell_number(d + 1)
    ok &= fan.check_simplicial()
    detail["complete"] = fan.check_complete(samples=100, seed=seed)
    ok &= detail["complete"]
    if d <= VERTEX_BOUND:
        rep = check_simple_and_facets(build_pellytope(d), fan)
        detail["polytope"] = rep.to_json()
        ok &= rep.simple and rep.vertices == pell_number(d + 1)
    if d <= STAR_BOUND and d >= 2:
        stars = [check_star(d, k) for k in range(fan.n_rays)]
        detail["stars_isomorphic"] = all(s.isomorphic for s in stars)
        ok &= detail["stars_isomorphic"]
    return bool(ok), detail


def _check_matrix(d: int, seed: int) -> tuple[bool, dict]:
    from .exact_linalg import int_inverse
    from .pellytope import GeneratorMismatch, build_M, closed_form_Minv, minimal_generators

    M, Minv = build_M(d), closed_form_Minv(d)
    detail = {"identity": (Minv @ M).is_identity(), "matches_inverse": int_inverse(M) == Minv}
    try:
        minimal_generators(d)
        detail["generator_formulas"] = True
    except GeneratorMismatch as exc:
        detail["generator_formulas"] = str(exc)
    return all(v is True for v in detail.values()), detail


def _check_uequations(d: int, seed: int) -> tuple[bool, dict]:
    from .pellytope import build_fan, build_u_equations, compatibility, u_monomial_map

    system = build_u_equations(d)
    phi = u_monomial_map(d)
    zero = [reduce_pq(substitute_monomials(R, phi)[0], d).is_zero() for R in system.polynomials()]
    n = system.n
    from_fan = set(extract_flag_complex(build_fan(d)).non_edges)
    from_rule = {frozenset((i, j)) for i in range(n) for j in range(i + 1, n) if not compatibility(i, j, d)}
    agree = from_fan == system.incompatible_pairs() == from_rule
    return all(zero) and agree, {"identities": sum(zero), "equations": n, "incompatibility_agrees": agree}


def _check_binary(d: int, seed: int) -> tuple[bool, dict]:
    from .binary_geometry import verify_binary_geometry
    from .pellytope import pell_model

    rep = verify_binary_geometry(pell_model(d), seed=seed)
    return rep.passed, {"strata": len(rep.strata), "faces": rep.faces,
                        "jacobian_ranks": rep.jacobian_ranks, "failures": rep.failures}


def _check_assoc(d: int, seed: int, trials: int = 20) -> tuple[bool, dict]:
    from .associahedron import (check_assoc_u_equations, check_newton_polytope,
                                check_refinement, pellytope_divides_G)

    n = d + 3
    newton = check_newton_polytope(n, seed=seed)
    divides, _ = pellytope_divides_G(n)
    ref = check_refinement(n)
    dih = check_assoc_u_equations(n, trials=trials, seed=seed)
    detail = {"n": n, "newton_vertices": newton.vertices, "expected_vertices": newton.expected,
              "divides": divides, "refinement": ref.to_json(), "dihedral_passed": dih.passed}
    return newton.passed and divides and ref.refines and dih.passed, detail


RUNNERS: dict[str, Callable[[int, int], tuple[bool, dict]]] = {
    "fan": _check_fan, "matrix": _check_matrix, "uequations": _check_uequations,
    "binary": _check_binary, "assoc": _check_assoc,
}


# -- subcommands -------------------------------------------------------------------

def cmd_fan(args) -> tuple[int, dict, str]:
    from .pellytope import build_fan, ray_label

    fan = build_fan(args.d)
    data = {"d": args.d, "fan": fan.to_json(), "n_rays": fan.n_rays,
            "n_maximal_cones": len(fan.maximal_cones)}
    labels = [ray_label(k, args.d) for k in range(fan.n_rays)]
    text = [f"fan in dimension {args.d}: {fan.n_rays} rays, {len(fan.maximal_cones)} maximal cones"]
    text += [f"  u{k + 1}: {lab} = {list(r)}" for k, (lab, r) in enumerate(zip(labels, fan.rays))]
    return 0, data, "\n".join(text)


def cmd_polytope(args) -> tuple[int, dict, str]:
    from .pellytope import build_fan, build_pellytope, pell_number

    poly = build_pellytope(args.d)
    rep = check_simple_and_facets(poly, build_fan(args.d))
    ok = rep.simple and rep.vertices == pell_number(args.d + 1)
    data = {"d": args.d, "polytope": poly.to_json(), "report": rep.to_json()}
    text = (f"pellytope in dimension {args.d}: {len(poly.support)} lattice points, "
            f"{rep.vertices} vertices, {rep.facets} facets, simple={rep.simple}")
    return (0 if ok else 1), data, text


def cmd_matrix(args) -> tuple[int, dict, str]:
    from .pellytope import build_M, closed_form_Minv

    ok, detail = _check_matrix(args.d, args.seed)
    M, Minv = build_M(args.d), closed_form_Minv(args.d)
    data = {"d": args.d, "M": M.to_rows(), "Minv": Minv.to_rows(), "checks": detail}
    fmt = lambda A: "\n".join("  " + " ".join(f"{x:3d}" for x in r) for r in A.to_rows())  # noqa: E731
    text = f"M:\n{fmt(M)}\ninverse:\n{fmt(Minv)}\nchecks: {detail}"
    return (0 if ok else 1), data, text


def cmd_uequations(args) -> tuple[int, dict, str]:
    from .pellytope import build_u_equations, minimal_generators

    system = build_u_equations(args.d)
    gens = minimal_generators(args.d)
    data = system.to_json(d=args.d)
    data["generators"] = [g.to_json() for g in gens]
    text = "\n".join([str(system), ""] + [f"u{k + 1} = {g}" for k, g in enumerate(gens)])
    return 0, data, text


def cmd_verify(args) -> tuple[int, dict, str]:
    checks = _parse_checks(args.checks)
    for c in checks:
        if args.d > BOUNDS[c]:
            raise UsageError(f"check '{c}' supports d <= {BOUNDS[c]}, got d={args.d}")
        if c == "assoc" and args.d < 1:
            raise UsageError("check 'assoc' needs d >= 1")
    results = []
    for c in checks:
        t0 = time.perf_counter()
        ok, detail = RUNNERS[c](args.d, args.seed)
        dt = time.perf_counter() - t0
        print(f"[{c}] {'pass' if ok else 'FAIL'} in {dt:.2f}s", file=sys.stderr)
        results.append({"check": c, "passed": ok, "detail": detail, "_seconds": dt})
    passed = all(r["passed"] for r in results)
    data = {"d": args.d, "seed": args.seed, "passed": passed,
            "checks": [{k: v for k, v in r.items() if k != "_seconds"} for r in results]}
    text = "\n".join(f"{r['check']:<11} {'pass' if r['passed'] else 'FAIL'}  {r['_seconds']:8.2f}s"
                     for r in results)
    return (0 if passed else 1), data, text


def cmd_assoc(args) -> tuple[int, dict, str]:
    from .associahedron import check_assoc_u_equations, check_refinement

    if not 4 <= args.n <= 8:
        raise UsageError(f"--n must lie in [4, 8], got {args.n}")
    ref = check_refinement(args.n)
    dih = check_assoc_u_equations(args.n, trials=args.trials, seed=args.seed)
    ok = ref.refines and dih.passed
    data = {"n": args.n, "passed": ok, "refinement": ref.to_json(), "dihedral": dih.to_json()}
    extra = ", ".join(str(list(r)) for r in ref.extra_rays) or "none"
    text = (f"n={args.n}: refines={ref.refines}, extra rays: {extra}\n"
            f"dihedral identities: {sum(t.passed for t in dih.trials)}/{len(dih.trials)} trials exact")
    return (0 if ok else 1), data, text


def _parse_checks(raw: str) -> list[str]:
    names = [s.strip() for s in raw.split(",") if s.strip()]
    if not names:
        raise UsageError("empty --checks")
    if "all" in names:
        return list(CHECKS)
    bad = [s for s in names if s not in CHECKS]
    if bad:
        raise UsageError(f"unknown checks {bad}; choose from {', '.join(CHECKS)}, all")
    return [c for c in CHECKS if c in names]


# -- plumbing ---------------------------------------------------------------------

def _positive(name: str):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be at least 1")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", default="-", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="pellspace", description="Pellytope and Pellspace computations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_d(name, func, help_, bound, **extra):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--d", type=_positive("--d"), required=True)
        p.set_defaults(func=func, bound=bound)
        for flag, kw in extra.items():
            p.add_argument(flag, **kw)
        return p

    with_d("fan", cmd_fan, "normal fan of the pellytope", BOUNDS["fan"])
    with_d("polytope", cmd_polytope, "the pellytope and its vertices", VERTEX_BOUND)
    with_d("matrix", cmd_matrix, "tropical matrix and its inverse", BOUNDS["matrix"])
    with_d("uequations", cmd_uequations, "u-equations and their monomial parametrization", BOUNDS["uequations"])
    with_d("verify", cmd_verify, "run verification suites", None,
           **{"--checks": {"default": "all", "help": "comma list of " + ", ".join(CHECKS) + " or all"}})
    p = sub.add_parser("assoc", parents=[common], help="associahedron refinement and dihedral checks")
    p.add_argument("--n", type=_positive("--n"), required=True)
    p.add_argument("--trials", type=_positive("--trials"), default=20)
    p.set_defaults(func=cmd_assoc, bound=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.bound is not None and args.d > args.bound:
            raise UsageError(f"{args.command} supports d <= {args.bound}, got d={args.d}")
        code, data, text = args.func(args)
    except UsageError as exc:
        print(f"pellspace {args.command}: error: {exc}", file=sys.stderr)
        return 2
    payload = json.dumps(data, sort_keys=True, indent=2, default=fraction_str) if args.format == "json" else text
    try:
        if args.out == "-":
            sys.stdout.write(payload + "\n")
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
    except OSError as exc:
        print(f"pellspace: cannot write output: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
