"""Command-line front end.

Exit codes: 0 success, 1 invalid input or arguments, 2 method not applicable to
the profile, 3 solver did not converge, 4 audit found a violation, 5 a
reproduction failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from .axioms import (
    STRICT,
    GeneratorConfig,
    enumerate_macrovertices,
    macrovertex_independence_test,
    scm_audit,
    scm_confront,
    scm_violation_search,
    splitting_balance_check,
)
from .core import Profile, cumulative_matrix, validate_profile
from .errors import ScoringError
from .fixtures import FIXTURE_NAMES, FixtureCheckError, fixture, fixture_document
from .procedures import (
    METHOD_NAMES,
    Method,
    ScoreVector,
    grs_scores,
    least_squares_scores,
    row_sum_scores,
    wei_scores,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INAPPLICABLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VIOLATION = 4
EXIT_REPRO_FAIL = 5

_INAPPLICABLE = {"NOT_INDIVISIBLE", "DISCONNECTED", "ISOLATED_ALTERNATIVE",
                 "EPSILON_OUT_OF_RANGE", "DIVIDE_BY_ZERO", "SINGULAR"}
_NO_CONVERGENCE = {"NO_CONVERGENCE", "DOMAIN_EXIT"}

TIE_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def exit_code_for(err: ScoringError) -> int:
    if err.code in _INAPPLICABLE:
        return EXIT_INAPPLICABLE
    if err.code in _NO_CONVERGENCE:
        return EXIT_NO_CONVERGENCE
    return EXIT_INPUT


# -- serialization -----------------------------------------------------------


def num(x: float) -> float:
    """Round to 15 significant digits for output."""
    return float(f"{float(x):.15g}")


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return num(obj) if np.isfinite(obj) else str(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def csv_to_document(text: str) -> dict[str, Any]:
    """Rows ``judge,a,b,outcome`` (optional header) into a profile document."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(cell.strip() for cell in r)]
    if rows and [c.strip().lower() for c in rows[0]] == ["judge", "a", "b", "outcome"]:
        rows = rows[1:]
    alternatives: dict[str, None] = {}
    judges: dict[str, list[dict[str, str]]] = {}
    for k, row in enumerate(rows):
        if len(row) != 4:
            raise ScoringError("MALFORMED", f"CSV row {k + 1}: expected judge,a,b,outcome")
        judge, a, b, outcome = (c.strip() for c in row)
        alternatives.setdefault(a)
        alternatives.setdefault(b)
        judges.setdefault(judge, []).append({"a": a, "b": b, "outcome": outcome})
    return {"alternatives": list(alternatives),
            "judges": [{"comparisons": comps} for comps in judges.values()]}


def load_profile(path: str, fmt: str | None = None) -> Profile:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScoringError("MALFORMED", f"cannot read {path}: {exc.strerror}") from exc
    fmt = fmt or ("csv" if path.lower().endswith(".csv") else "json")
    if fmt == "csv":
        doc = csv_to_document(text)
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScoringError("MALFORMED", f"invalid JSON: {exc}") from exc
    return validate_profile(doc)


def ranking(labels: Sequence[str], scores: Sequence[float], tol: float = TIE_TOL) -> tuple[list[str], list[list[str]]]:
    """Labels by descending score (input order among ties) and the tie groups."""
    order = sorted(range(len(labels)), key=lambda k: (-scores[k], k))
    groups: list[list[int]] = []
    for k in order:
        if groups and abs(scores[groups[-1][0]] - scores[k]) <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    ranked = [labels[k] for g in groups for k in sorted(g)]
    return ranked, [[labels[k] for k in sorted(g)] for g in groups if len(g) > 1]


def score_report(method: Method, sv: ScoreVector) -> dict[str, Any]:
    labels = sv.alternatives
    ranked, ties = ranking(labels, sv.scores)
    params = dict(method.params)
    params.update(sv.params)
    diag: dict[str, Any] = {"iterations": sv.diag.iterations, "residual": sv.diag.residual,
                            "converged": sv.diag.converged}
    if sv.lam is not None:
        diag["lambda"] = sv.lam
    return _plain({
        "method": method.name,
        "params": params,
        "normalization": sv.normalization,
        "scores": [{"alternative": a, "score": s} for a, s in zip(labels, sv.scores)],
        "ranking": ranked,
        "tie_groups": ties,
        "diagnostics": diag,
    })


def _emit(payload: Any, output: str | None) -> None:
    text = json.dumps(_plain(payload), indent=2)
    if output and output != "-":
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# -- commands ------------------------------------------------------------------


def _method_from(args: argparse.Namespace) -> Method:
    eps = args.epsilon
    if eps is not None and eps.lower() not in ("auto", "max", "bound"):
        try:
            eps = float(eps)
        except ValueError as exc:
            raise ScoringError("MALFORMED", f"bad --epsilon {eps!r}") from exc
    return Method.parse(args.method, epsilon=eps, variant=args.variant,
                        direction=args.direction, combine=args.combine)


def cmd_rate(args: argparse.Namespace) -> int:
    p = load_profile(args.input, args.format)
    m = _method_from(args)
    _emit(score_report(m, m(p)), args.output)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    p = load_profile(args.input, args.format)
    m = _method_from(args)
    sv = m(p)
    labels = p.alternatives
    violations = scm_audit(p, sv)
    report: dict[str, Any] = score_report(m, sv)
    report["scm"] = {
        "pairs_checked": p.n * (p.n - 1),
        "violations": [v.to_dict(labels) for v in violations],
    }
    violated = bool(violations)
    if args.splitting_balance:
        sb = splitting_balance_check(p, sv)
        report["splitting_balance"] = sb.to_dict()
        violated |= not sb.passed
    if args.macrovertex:
        found = []
        for M in enumerate_macrovertices(p):
            v = macrovertex_independence_test(m, p, M, args.perturbations, args.seed)
            found.append({"members": sorted(M), **v.to_dict()})
            violated |= not v.independent
        report["macrovertices"] = found
    _emit(report, args.output)
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    if args.budget < 0:
        raise UsageError("--budget must be nonnegative")
    if not (1 <= args.n_min <= args.n_max and 1 <= args.m_min <= args.m_max):
        raise UsageError("need 1 <= n-min <= n-max and 1 <= m-min <= m-max")
    if not 0.0 <= args.draw_prob <= 1.0 or not 0.0 < args.pair_prob <= 1.0:
        raise UsageError("probabilities must lie in [0, 1]")
    m = _method_from(args)
    gen = GeneratorConfig(args.n_min, args.n_max, args.m_min, args.m_max, args.draw_prob,
                          args.pair_prob, args.indivisible_only)
    res = scm_violation_search(m, gen, args.seed, args.budget, args.workers)
    out: dict[str, Any] = {"method": m.describe(), "generator": gen.to_dict(), "seed": args.seed,
                           "budget": args.budget, "found": res.found, "trials": res.trials,
                           "skipped": res.skipped}
    if res.report is None:
        out["message"] = f"no violation in {res.trials} trials"
    else:
        out["counterexample"] = res.report.to_dict()
        out["reverified"] = res.report.reverify()
    _emit(out, args.output)
    return EXIT_OK


def _reproduce_fig1() -> list[tuple[bool, str]]:
    p = fixture("fig1").profile
    rs = row_sum_scores(p)
    rs_flags = {(v.pair, v.requirement) for v in scm_audit(p, rs)}
    grs = grs_scores(p, 1 / 18)
    ls = least_squares_scores(p)
    ls_flags = {v.pair for v in scm_audit(p, ls)}
    biased = [2.0, 3.0, 1.0, 4.0]
    sb = splitting_balance_check(p, biased)
    return [
        (np.array_equal(rs.scores, [4.5, 1.5, 1.5, 1.5]), "row sums are (4.5, 1.5, 1.5, 1.5)"),
        (((2, 3), STRICT) in rs_flags, "row-sum audit flags (3, 4) as a strict demand"),
        (not scm_audit(p, grs), "generalized row sum (eps = 1/18) audit is clean"),
        (np.allclose(ls.scores, [0.5, -0.5, 0.5, -0.5], atol=1e-9, rtol=0), "least squares is (0.5, -0.5, 0.5, -0.5)"),
        ((0, 2) in ls_flags, "least-squares audit flags (1, 3)"),
        (not scm_audit(p, biased), "scores (2, 3, 1, 4) pass the audit"),
        (not sb.passed and sb.witness == (frozenset("13"), frozenset("24")),
         "scores (2, 3, 1, 4) fail splitting balance on J1 = {1, 3}, J2 = {2, 4}"),
    ]


def _reproduce_prop2() -> list[tuple[bool, str]]:
    p = fixture("prop2").profile
    s, _ = wei_scores(cumulative_matrix(p))
    flags = {v.pair for v in scm_audit(p, s)}
    return [
        (abs(s[1] - s[2]) <= 1e-9, f"wei gives |s_2 - s_3| = {abs(s[1] - s[2]):.1e} <= 1e-9"),
        ((1, 2) in flags, "audit flags (2, 3)"),
    ]


def _reproduce_prop10() -> list[tuple[bool, str]]:
    p = fixture("prop10").profile
    s = least_squares_scores(p)
    flags = {v.pair for v in scm_audit(p, s)}
    return [
        (s[3] < s[2], "least squares ranks 4 below 3 despite its extra win"),
        ((3, 2) in flags, "audit flags (4, 3)"),
    ]


def _reproduce_fig2() -> list[tuple[bool, str]]:
    fx = fixture("fig2_scenario")
    v = scm_confront(fx.profile, fx.scores, "i", "j")
    return [(v.requirement == STRICT, "confrontation of i and j demands s_i > s_j")]


REPRODUCTIONS = {"fig1": _reproduce_fig1, "fig2": _reproduce_fig2, "prop2": _reproduce_prop2,
                 "prop10": _reproduce_prop10}


def cmd_reproduce(args: argparse.Namespace) -> int:
    targets = list(REPRODUCTIONS) if args.target == "all" else [args.target]
    ok = True
    for name in targets:
        try:
            checks = REPRODUCTIONS[name]()
        except (FixtureCheckError, ScoringError) as exc:
            checks = [(False, f"error: {exc}")]
        for passed, text in checks:
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'} {name}: {text}")
    return EXIT_OK if ok else EXIT_REPRO_FAIL


def cmd_fixture(args: argparse.Namespace) -> int:
    _emit(fixture_document(args.name), args.output)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _add_method_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--method", required=required, default=None if required else "wei",
                   help=f"one of: {', '.join(METHOD_NAMES)}")
    p.add_argument("--epsilon", help="procedure parameter; 'auto' picks the default")
    p.add_argument("--variant", choices=["A", "C", "a", "c"], help="KTT matrix: A or Taylor's C")
    p.add_argument("--direction", choices=["win", "loss"])
    p.add_argument("--combine", choices=["difference", "ratio"])


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="profile document (JSON) or CSV; '-' for stdin")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scmrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rate = sub.add_parser("rate", help="score a profile")
    _add_input_args(rate)
    _add_method_args(rate)
    rate.set_defaults(func=cmd_rate)

    audit = sub.add_parser("audit", help="score a profile and check the axioms")
    _add_input_args(audit)
    _add_method_args(audit)
    audit.add_argument("--splitting-balance", action="store_true")
    audit.add_argument("--macrovertex", action="store_true",
                       help="enumerate macrovertices and test independence for each")
    audit.add_argument("--perturbations", type=int, default=100)
    audit.add_argument("--seed", type=int, default=0)
    audit.set_defaults(func=cmd_audit)

    search = sub.add_parser("search", help="look for a random profile that breaks the axiom")
    _add_method_args(search, required=False)
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--budget", type=int, default=1000)
    search.add_argument("--n-min", type=int, default=3)
    search.add_argument("--n-max", type=int, default=6)
    search.add_argument("--m-min", type=int, default=1)
    search.add_argument("--m-max", type=int, default=3)
    search.add_argument("--draw-prob", type=float, default=0.2)
    search.add_argument("--pair-prob", type=float, default=0.7)
    search.add_argument("--indivisible-only", action="store_true")
    search.add_argument("--workers", type=int, default=1)
    search.add_argument("--output")
    search.set_defaults(func=cmd_search)

    repro = sub.add_parser("reproduce", help="re-derive the worked examples")
    repro.add_argument("target", choices=[*REPRODUCTIONS, "all"])
    repro.set_defaults(func=cmd_reproduce)

    fx = sub.add_parser("fixture", help="print a canned profile document")
    fx.add_argument("name", choices=FIXTURE_NAMES)
    fx.add_argument("--output")
    fx.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "USAGE", "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except ScoringError as exc:
        print(json.dumps(_plain(exc.to_dict())), file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
