"""``subkit`` command-line front end.

Exit codes: 0 success or equivalent, 1 negative verdict or distinguished,
2 unknown, 64 usage error, 65 bad input data.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .bratteli import (
    Budget, analyze_equivalence, enlarge, state_split, stationary_diagram,
    substitution_diagram, supernatural, telescope, verify_certificate,
)
from .exact_matrix import (
    ExactMatrix, MatrixError, is_primitive, pf_eigenvector, pf_report, refine_pf_interval,
)
from .fibonacci import classify_fib_factors, pq_factorize
from .formats import (
    FormatError, SCHEMA, certificate_from_json, certificate_to_json, diagram_to_json, dump_mat,
    dump_sub, dumps, ordered_to_json, parse_mat, parse_sub,
)
from .ordered_bratteli import (
    FinitePath, OrderedBudget, OrderedCertificate, analyze_ordered_equivalence,
    max_min_disjoint, ordered_from_substitution, ordered_telescope, path_counts,
    taf_description, verify_ordered_certificate, vershik_successor,
)
from .dot import export_dot
from .words import AlphabetError, Substitution, abelianize, compose, factor_language, is_proper, power

EX_OK, EX_NEGATIVE, EX_UNKNOWN, EX_USAGE, EX_DATAERR = 0, 1, 2, 64, 65
VERDICT_CODES = {"equivalent": EX_OK, "distinguished": EX_NEGATIVE, "unknown": EX_UNKNOWN,
                 True: EX_OK, False: EX_NEGATIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, "%s: error: %s\n" % (self.prog, message))


# -- input helpers ------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise FormatError("cannot read %s: %s" % (path, e.strerror)) from None


def _looks_like_matrix(text: str) -> bool:
    body = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    body = [l for l in body if l]
    return bool(body) and all(all(tok.lstrip("-").isdigit() for tok in l.split()) for l in body)


def load_sub(path: str) -> Substitution:
    return parse_sub(_read(path))


def load_mat(path: str) -> ExactMatrix:
    return parse_mat(_read(path))


def load_any(path: str):
    text = _read(path)
    if path.endswith(".mat") or (not path.endswith(".sub") and _looks_like_matrix(text)):
        return parse_mat(text)
    return parse_sub(text)


def _incidence(x) -> ExactMatrix:
    """Incidence matrix of the stationary diagram for a ``.mat`` or ``.sub`` input."""
    return abelianize(x).T if isinstance(x, Substitution) else x


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command, self.inputs = command, inputs
        self.verdict = None
        self.details: dict = {}
        self.text: List[str] = []
        self.started = time.perf_counter()

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "command": self.command, "inputs": self.inputs,
                "verdict": self.verdict, "details": self.details,
                "timing": round(time.perf_counter() - self.started, 6)}


# -- commands -----------------------------------------------------------------

def _pf_details(m: ExactMatrix) -> dict:
    out = {}
    ok, k = is_primitive(m)
    out["primitive"] = ok
    out["primitivity_exponent"] = k
    if ok:
        r = pf_report(m)
        out["purely_aperiodic"] = not r.pf_is_rational
        out["pf_interval"] = [_frac(r.pf_isolation_interval[0]), _frac(r.pf_isolation_interval[1])]
        lo, hi = refine_pf_interval(m, Fraction(1, 10 ** 12))
        out["pf_approx"] = round(float((lo + hi) / 2), 10)
        out["pf_minimal_polynomial"] = str(r.pf_minimal_polynomial)
        out["characteristic_polynomial"] = str(r.characteristic_polynomial)
        if r.pf_is_rational:
            out["pf_value"] = r.pf_integer_value
    return out


def cmd_analyze(args, rep: Report) -> int:
    x = load_any(args.file)
    if isinstance(x, Substitution):
        if not x.is_square:
            raise AlphabetError("analyze needs a square substitution")
        m = abelianize(x)
        rep.details["matrix"] = m.tolist()
        rep.details.update(_pf_details(m))
        rep.details["proper"] = is_proper(x)
        pc = path_counts(x)
        rep.details["max_paths"], rep.details["min_paths"] = pc.max_count, pc.min_count
        if rep.details["primitive"]:
            ev = pf_eigenvector(m, "right", Fraction(1, 10 ** 10))
            rep.details["letter_frequencies"] = {l: round(float(v), 9)
                                                 for l, v in zip(x.domain.letters, ev.entries)}
        sn = supernatural(m.T)
    else:
        m = x
        m.validate_substitution()
        rep.details["matrix"] = m.tolist()
        rep.details.update(_pf_details(m))
        sn = supernatural(m)
    rep.details["supernatural"] = str(sn) if sn else None
    d = rep.details
    rep.text.append("matrix: %s" % d["matrix"])
    if d["primitive"]:
        rep.text.append("primitive (k=%d)" % d["primitivity_exponent"])
        if d["purely_aperiodic"]:
            lo, hi = d["pf_interval"]
            rep.text.append("PF eigenvalue in (%s, %s) ≈ %.9f, irrational" % (lo, hi, d["pf_approx"]))
        else:
            rep.text.append("PF eigenvalue = %d, rational" % d["pf_value"])
        rep.text.append("purely aperiodic" if d["purely_aperiodic"] else "not purely aperiodic")
    else:
        rep.text.append("not primitive")
    if "proper" in d:
        rep.text.append("proper: %s" % ("yes" if d["proper"] else "no"))
        rep.text.append("max paths: %d, min paths: %d" % (d["max_paths"], d["min_paths"]))
        if "letter_frequencies" in d:
            rep.text.append("letter frequencies: " + ", ".join(
                "%s≈%.6f" % kv for kv in d["letter_frequencies"].items()))
    if d["supernatural"]:
        rep.text.append("supernatural: %s" % d["supernatural"])
    rep.verdict = d["primitive"]
    return EX_OK


def cmd_equiv(args, rep: Report) -> int:
    a, b = load_any(args.first), load_any(args.second)
    rep.inputs.update(ordered=args.ordered, budget=args.budget, seed=args.seed)
    if args.ordered:
        if not (isinstance(a, Substitution) and isinstance(b, Substitution)):
            raise UsageError("--ordered needs two .sub files")
        res = analyze_ordered_equivalence(a, b, OrderedBudget.preset(args.budget), threads=args.threads)
    else:
        res = analyze_equivalence(_incidence(a), _incidence(b), Budget.preset(args.budget))
    rep.verdict = res.verdict
    rep.details["invariants"] = res.invariants
    if res.invariant:
        rep.details["invariant"] = res.invariant
    if res.method:
        rep.details["method"] = res.method
    if res.certificate is not None:
        cj = certificate_to_json(res.certificate)
        rep.details["certificate"] = cj
        if args.certificate:
            with open(args.certificate, "w", encoding="utf-8") as fh:
                fh.write(dumps(cj) + "\n")
    line = res.verdict
    if res.invariant:
        line += " (%s)" % res.invariant
    elif res.method:
        line += " (%s, chain of %d)" % (res.method, len(res.certificate.chain))
    rep.text.append(line)
    return VERDICT_CODES[res.verdict]


def cmd_verify(args, rep: Report) -> int:
    import json
    a, b = load_any(args.first), load_any(args.second)
    try:
        cert = certificate_from_json(json.loads(_read(args.certificate)))
    except ValueError as e:
        raise FormatError(str(e)) from None
    if isinstance(cert, OrderedCertificate):
        ok = verify_ordered_certificate(cert, a, b)
    else:
        ok = verify_certificate(cert, stationary_diagram(_incidence(a)), stationary_diagram(_incidence(b)))
    rep.verdict = ok
    rep.text.append("valid" if ok else "invalid")
    return VERDICT_CODES[ok]


def cmd_telescope(args, rep: Report) -> int:
    x = load_any(args.file)
    cuts = [int(c) for c in args.cuts.split(",")] if args.cuts else None
    if isinstance(x, Substitution) and args.ordered:
        d = ordered_from_substitution(x, args.depth)
        t = ordered_telescope(d, cuts or [args.stride * i for i in range(args.depth + 1)])
        rep.details["diagram"] = ordered_to_json(t)
    else:
        d = stationary_diagram(_incidence(x), args.depth * (args.stride if not cuts else 1))
        if cuts:
            t = telescope(d, cuts)
        else:
            t = telescope(d, [args.stride * i for i in range(args.depth + 1)])
        rep.details["diagram"] = diagram_to_json(t)
    dj = rep.details["diagram"]
    if dj.get("generator") is not None:
        rep.text.append("generator: %s" % dj["generator"])
    rep.text.append("labels: " + " ".join(str(tuple(l)) for l in dj["labels"]))
    for i, t in enumerate(dj["transitions"]):
        rep.text.append("T%d: %s" % (i, t))
    rep.verdict = True
    return EX_OK


def cmd_compose(args, rep: Report) -> int:
    s = compose(load_sub(args.outer), load_sub(args.inner))
    rep.details["substitution"] = dump_sub(s)
    rep.text.append(dump_sub(s).rstrip("\n"))
    rep.verdict = True
    return EX_OK


def cmd_power(args, rep: Report) -> int:
    s = power(load_sub(args.file), args.k)
    rep.details["substitution"] = dump_sub(s)
    rep.text.append(dump_sub(s).rstrip("\n"))
    rep.verdict = True
    return EX_OK


def cmd_abelianize(args, rep: Report) -> int:
    m = abelianize(load_sub(args.file))
    rep.details["matrix"] = m.tolist()
    rep.text.append(dump_mat(m).rstrip("\n"))
    rep.verdict = True
    return EX_OK


def cmd_split(args, rep: Report) -> int:
    m, n, s = load_mat(args.file), load_mat(args.n_factor), load_mat(args.s_factor)
    d, cert = state_split(m, n, s)
    rep.details["matrix"] = d.tolist()
    rep.details["certificate"] = certificate_to_json(cert)
    rep.details["primitive"] = is_primitive(d)[0]
    rep.text.append(dump_mat(d).rstrip("\n"))
    rep.verdict = True
    return EX_OK


def cmd_enlarge(args, rep: Report) -> int:
    e = enlarge(load_mat(args.file), args.target)
    rep.details.update(matrix=e.matrix.tolist(), power=e.power, n_factor=e.n_factor.tolist(),
                       s_factor=e.s_factor.tolist(), certificate=certificate_to_json(e.certificate))
    rep.text.append("# via power %d" % e.power)
    rep.text.append(dump_mat(e.matrix).rstrip("\n"))
    rep.verdict = True
    return EX_OK


def cmd_supernatural(args, rep: Report) -> int:
    sn = supernatural(_incidence(load_any(args.file)))
    rep.verdict = sn is not None
    rep.details["supernatural"] = str(sn) if sn else None
    rep.details["exponents"] = sn.to_json() if sn else None
    rep.text.append(str(sn) if sn else "not applicable (rank is not 1)")
    return VERDICT_CODES[rep.verdict]


def cmd_pq(args, rep: Report) -> int:
    w = pq_factorize(load_mat(args.file))
    rep.verdict = w is not None
    rep.details["word"] = str(w) if w is not None else None
    rep.text.append(("%s" % w if str(w) else "(empty word)") if w is not None else "no P/Q factorization")
    return VERDICT_CODES[rep.verdict]


def cmd_fib_classify(args, rep: Report) -> int:
    c = classify_fib_factors(load_mat(args.first), load_mat(args.second))
    rep.verdict = c is not None
    rep.details["class"] = {"kind": c.kind, "k": c.k, "l": c.l} if c else None
    rep.text.append(str(c) if c else "product is not a Fibonacci power")
    return VERDICT_CODES[rep.verdict]


def cmd_factors(args, rep: Report) -> int:
    lang = factor_language(load_sub(args.file), args.k)
    words = lang.rendered()
    rep.details["factors"] = words
    rep.text.extend(words)
    rep.verdict = True
    return EX_OK


def cmd_successor(args, rep: Report) -> int:
    s = load_sub(args.file)
    d = ordered_from_substitution(s, max(len(args.ranks), 1))
    ranks = tuple(int(r) for r in args.ranks.split(",")) if args.ranks else ()
    p = FinitePath(s.domain.index(args.vertex), ranks)
    nxt = vershik_successor(d, p)
    rep.verdict = nxt is not None
    rep.details["successor"] = list(nxt.ranks) if nxt else None
    rep.text.append(",".join(map(str, nxt.ranks)) if nxt else "none (maximal path)")
    return VERDICT_CODES[rep.verdict]


def cmd_export_dot(args, rep: Report) -> int:
    x = load_any(args.file)
    if isinstance(x, Substitution):
        text = export_dot(ordered_from_substitution(x, args.depth), args.depth, args.color_extremes)
    else:
        text = export_dot(stationary_diagram(x, args.depth), args.depth)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        rep.text.append(text.rstrip("\n"))
    rep.details["dot"] = text
    rep.verdict = True
    return EX_OK


def cmd_taf(args, rep: Report) -> int:
    s = load_sub(args.file)
    text = taf_description(ordered_from_substitution(s, args.depth), args.depth)
    rep.details["description"] = text
    rep.text.append(text)
    rep.verdict = True
    return EX_OK


def cmd_disjoint(args, rep: Report) -> int:
    ok = max_min_disjoint(load_sub(args.file))
    rep.verdict = ok
    rep.text.append("disjoint" if ok else "a path is both maximal and minimal")
    return VERDICT_CODES[ok]


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="subkit", description="Substitutions, Bratteli diagrams and telescope equivalence.")
    p.add_argument("--version", action="version", version="subkit %s" % __version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("analyze", cmd_analyze, "invariants of a substitution or matrix")
    sp.add_argument("file")

    sp = add("equiv", cmd_equiv, "decide or bound telescope equivalence")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--ordered", action="store_true")
    sp.add_argument("--budget", choices=("small", "default", "large"),
                    default=os.environ.get("SUBKIT_BUDGET_PRESET") or "default")
    sp.add_argument("--certificate", metavar="OUT", help="write the certificate as JSON")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    sp = add("verify", cmd_verify, "check a certificate JSON file")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("certificate")

    sp = add("telescope", cmd_telescope, "telescope a stationary diagram")
    sp.add_argument("file")
    sp.add_argument("--stride", type=int, default=2)
    sp.add_argument("--cuts", help="comma-separated cut levels starting at 0")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--ordered", action="store_true")

    sp = add("compose", cmd_compose, "outer o inner")
    sp.add_argument("outer")
    sp.add_argument("inner")

    sp = add("power", cmd_power, "k-fold self-composition")
    sp.add_argument("file")
    sp.add_argument("--k", type=int, required=True)

    sp = add("abelianize", cmd_abelianize, "letter-count matrix (reads stdin by default)")
    sp.add_argument("file", nargs="?", default="-")

    sp = add("split", cmd_split, "state splitting M = N S  ->  S N")
    sp.add_argument("file")
    sp.add_argument("--n", dest="n_factor", required=True)
    sp.add_argument("--s", dest="s_factor", required=True)

    sp = add("enlarge", cmd_enlarge, "equivalent primitive matrix on more letters")
    sp.add_argument("file")
    sp.add_argument("--target", type=int, required=True)

    sp = add("supernatural", cmd_supernatural, "supernatural number of a rank-one diagram")
    sp.add_argument("file")

    sp = add("pq", cmd_pq, "P/Q factorization of a 2x2 matrix")
    sp.add_argument("file")

    sp = add("fib-classify", cmd_fib_classify, "classify A, B with A B a Fibonacci power")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = add("factors", cmd_factors, "admissible factors up to length k")
    sp.add_argument("file")
    sp.add_argument("--k", type=int, default=3)

    sp = add("successor", cmd_successor, "Vershik successor of a finite path")
    sp.add_argument("file")
    sp.add_argument("--vertex", required=True)
    sp.add_argument("--ranks", default="", help="comma-separated edge ranks, lowest level first")

    sp = add("export-dot", cmd_export_dot, "Graphviz export")
    sp.add_argument("file")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--color-extremes", action="store_true")
    sp.add_argument("-o", "--output")

    sp = add("taf", cmd_taf, "standard TAF chain description")
    sp.add_argument("file")
    sp.add_argument("--depth", type=int, default=2)

    sp = add("disjoint", cmd_disjoint, "are maximal and minimal paths disjoint")
    sp.add_argument("file")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    inputs = {k: v for k, v in vars(args).items()
              if k not in ("func", "json", "threads") and not callable(v)}
    rep = Report(args.command, inputs)
    try:
        code = args.func(args, rep)
    except UsageError as e:
        print("subkit: %s" % e, file=sys.stderr)
        return EX_USAGE
    except (FormatError, AlphabetError, MatrixError, ValueError) as e:
        print("subkit: %s" % e, file=sys.stderr)
        return EX_DATAERR
    if args.json:
        print(dumps(rep.to_json()))
    else:
        for line in rep.text:
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
