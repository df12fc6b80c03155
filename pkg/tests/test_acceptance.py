"""The ten acceptance criteria, one test each.

Each test records a PASS/FAIL line with its wall time; the lines are printed
in the terminal summary (see conftest.py) and by running this file directly.
"""
import itertools
import random
import time
from math import comb

import numpy as np
import pytest

from subkit.bratteli import (
    INF, SupernaturalNumber, analyze_equivalence, stationary_diagram, state_split, supernatural,
    telescope_stride, verify_certificate,
)
from subkit.exact_matrix import (
    Compatibility, ExactMatrix, field_compatible, is_primitive, matrix_power, purely_aperiodic,
)
from subkit.fibonacci import FibFactorClass, PQWord, classify_fib_factors, fib_ordered_equivalence, pq_factorize
from subkit.formats import certificate_to_json, parse_mat, parse_sub
from subkit.ordered_bratteli import (
    analyze_ordered_equivalence, brute_force_path_counts, path_counts, verify_ordered_certificate,
)
from subkit.words import Substitution, abelianize, compose, power

from conftest import DATA
from oracles import extremal_prefixes, fib, recheck_ordered, recheck_unordered

E = ExactMatrix
S = Substitution.square
F = E([[1, 1], [1, 0]])
SIGMA1 = S({"a": "ab", "b": "a"})
SIGMA2 = S({"a": "ba", "b": "a"})

RESULTS = {}


def criterion(number, title, limit):
    """Time the test body, record PASS/FAIL and enforce the time limit."""
    def wrap(fn):
        def test():
            t0 = time.perf_counter()
            ok = False
            try:
                fn()
                ok = True
            finally:
                dt = time.perf_counter() - t0
                ok = ok and (limit is None or dt < limit)
                RESULTS[number] = "%s  %2d. %s (%.2fs%s)" % (
                    "PASS" if ok else "FAIL", number, title, dt,
                    "" if limit is None else ", limit %ds" % limit)
            if limit is not None:
                assert dt < limit, "took %.2fs, limit %ds" % (dt, limit)
        test.__name__ = fn.__name__
        test.__doc__ = fn.__doc__
        return test
    return wrap


@criterion(1, "Fibonacci arithmetic", 1)
def test_c01_fibonacci_arithmetic():
    assert abelianize(SIGMA1) == F
    for n in range(21):
        assert len(power(SIGMA1, n).image("a")) == fib(n + 2)
    assert matrix_power(F, 5) == E([[8, 5], [5, 3]])


@criterion(2, "Telescoping law", 1)
def test_c02_telescoping_law():
    t = telescope_stride(stationary_diagram(F, 8), 2, 4)
    assert t.generator == E([[2, 1], [1, 1]])
    assert t.labels == ((1, 1), (3, 2), (8, 5), (21, 13), (55, 34))


@criterion(3, "State splitting", 1)
def test_c03_state_splitting():
    f5 = matrix_power(F, 5)
    d, cert = state_split(f5, E([[1, 1, 0], [0, 0, 1]]), E([[7, 4], [1, 1], [5, 3]]))
    assert d == E([[7, 7, 4], [1, 1, 1], [5, 5, 3]])
    assert is_primitive(d)[0]
    assert verify_certificate(cert, stationary_diagram(f5), stationary_diagram(d))
    assert recheck_unordered(certificate_to_json(cert), f5.tolist(), d.tolist())


@criterion(4, "Supernatural numbers", 1)
def test_c04_supernatural():
    m12, m21 = E([[1, 2], [1, 2]]), E([[1, 1], [2, 2]])
    assert supernatural(m12) == SupernaturalNumber.from_dict({2: 1, 3: INF})
    assert supernatural(m21) == SupernaturalNumber.from_dict({3: INF})
    res = analyze_equivalence(m12, m21)
    assert res.verdict == "distinguished" and res.invariant == "supernatural"
    six = SupernaturalNumber.from_dict({2: INF, 3: INF})
    m33, m24 = E([[3, 3], [3, 3]]), E([[2, 2], [4, 4]])
    assert supernatural(m33) == supernatural(m24) == supernatural(E([[6]])) == six
    res = analyze_equivalence(m33, m24)
    assert res.equivalent
    assert verify_certificate(res.certificate, stationary_diagram(m33), stationary_diagram(m24))
    assert recheck_unordered(certificate_to_json(res.certificate), m33.tolist(), m24.tolist())


@criterion(5, "Pure aperiodicity", 1)
def test_c05_pure_aperiodicity():
    for k in range(1, 7):
        assert purely_aperiodic(matrix_power(F, k))
    assert not purely_aperiodic(E([[2, 2], [2, 2]]))
    assert field_compatible(F, E([[2, 2], [2, 2]])) is Compatibility.INCOMPATIBLE


def _battery():
    rng = random.Random(2024)
    out = []
    while len(out) < 150:
        n = rng.randint(1, 4)
        letters = "abcd"[:n]
        s = S({l: "".join(rng.choice(letters) for _ in range(rng.randint(1, 3))) for l in letters})
        if is_primitive(abelianize(s))[0]:
            out.append(s)
    return out


@criterion(6, "Max/min path counts", 5)
def test_c06_path_counts():
    def counts(s):
        pc = path_counts(s)
        return pc.max_count, pc.min_count
    assert counts(SIGMA1) == (2, 1)
    assert counts(SIGMA2) == (1, 2)
    assert counts(S({"a": "ab", "b": "ba"})) == (2, 2)
    subs = _battery()
    for s in subs[:40]:
        for k in range(1, 6):
            assert counts(power(s, k)) == counts(s)
    for s in subs:
        for depth in range(2 * len(s.domain), 13):
            mx, mn = extremal_prefixes(s.images, depth, "max"), extremal_prefixes(s.images, depth, "min")
            nxt = extremal_prefixes(s.images, depth + 1, "max"), extremal_prefixes(s.images, depth + 1, "min")
            if (mx, mn) == nxt:
                assert counts(s) == (mx, mn)
                assert brute_force_path_counts(s, depth) == (mx, mn, True)


@criterion(7, "Ordered equivalence positives", 30)
def test_c07_ordered_positives():
    aaab, aabb = S({"a": "aaab", "b": "aaab"}), S({"a": "aabb", "b": "aabb"})
    res = analyze_ordered_equivalence(aaab, aabb)
    assert res.equivalent
    assert verify_ordered_certificate(res.certificate, aaab, aabb)
    assert recheck_ordered(certificate_to_json(res.certificate), aaab.images, aabb.images)

    x, y = compose(SIGMA2, power(SIGMA1, 2)), compose(SIGMA1, power(SIGMA2, 2))
    # the letter-level identities of the worked example
    assert compose(power(SIGMA1, 2), SIGMA2).image("a") == "ababa"
    assert power(x, 2) == compose(power(SIGMA2, 3), power(SIGMA1, 3))
    assert power(y, 2) == compose(power(SIGMA1, 3), power(SIGMA2, 3))
    res = fib_ordered_equivalence(x, y)
    assert res.equivalent
    assert verify_ordered_certificate(res.certificate, x, y)
    assert recheck_ordered(certificate_to_json(res.certificate), x.images, y.images)
    assert {c.images for c in res.certificate.chain} == {power(SIGMA1, 3).images, power(SIGMA2, 3).images}


@criterion(8, "Ordered distinguishing", 10)
def test_c08_ordered_distinguishing():
    res = analyze_ordered_equivalence(SIGMA1, SIGMA2)
    assert res.verdict == "distinguished" and res.invariant == "max/min path counts"
    a = parse_sub((DATA / "ord22a.sub").read_text())
    b = parse_sub((DATA / "ord22b.sub").read_text())
    assert abelianize(a) == abelianize(b) == E([[2, 2], [2, 2]])
    res = analyze_ordered_equivalence(a, b)
    assert res.verdict != "equivalent"


@criterion(9, "P/Q machinery", 60)
def test_c09_pq_machinery():
    rng = random.Random(9)
    for _ in range(1000):
        w = PQWord("".join(rng.choice("PQ") for _ in range(rng.randint(0, 20))), right_j=rng.random() < 0.5)
        assert pq_factorize(w.evaluate()) == w
    for m in range(1, 11):
        for k in range(m + 1):
            for kind in ("PlainSplit", "TwistedSplit"):
                a, b = FibFactorClass(kind, k, m - k).matrices()
                assert classify_fib_factors(a, b) == FibFactorClass(kind, k, m - k)
    # every pair with entries <= 34 and product F^m; B is forced by A since det A = +-1
    r = np.arange(35)
    a, b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    det = a * d - b * c
    keep = np.abs(det) == 1
    powers = [(m, matrix_power(F, m).tolist()) for m in range(1, 16)]
    hits = 0
    for a, b, c, d, dt in zip(a[keep].tolist(), b[keep].tolist(), c[keep].tolist(), d[keep].tolist(),
                              det[keep].tolist()):
        for m, ((p, q), (s, t)) in powers:
            e, f = (d * p - b * s) * dt, (d * q - b * t) * dt
            g, h = (a * s - c * p) * dt, (a * t - c * q) * dt
            if min(e, f, g, h) < 0 or max(e, f, g, h) > 34:
                continue
            cls = classify_fib_factors(E([[a, b], [c, d]]), E([[e, f], [g, h]]))
            assert cls is not None and cls.m == m
            hits += 1
    assert hits > 0


UNORDERED_PAIRS = [
    ("m33.mat", "m24.mat"), ("m33.mat", "six.mat"), ("m24.mat", "six.mat"), ("f1.mat", "f2.mat"),
    ("f1.mat", "f5.mat"), ("f2.mat", "f5.mat"), ("m12.mat", "m21.mat"), ("f1.mat", "m22.mat"),
    ("m22.mat", "m22.mat"), ("fib1.sub", "fib2.sub"), ("aaab.sub", "aabb.sub"),
    ("thue_morse.sub", "m22.mat"), ("doubling.sub", "m22.mat"),
]
ORDERED_PAIRS = [
    ("fib1.sub", "fib2.sub"), ("fib1.sub", "fib.sub"), ("aaab.sub", "aabb.sub"),
    ("ord22a.sub", "ord22b.sub"), ("thue_morse.sub", "ord22a.sub"), ("doubling.sub", "doubling.sub"),
]


def _incidence(path):
    text = (DATA / path).read_text()
    if path.endswith(".mat"):
        return parse_mat(text)
    return abelianize(parse_sub(text)).T


@criterion(10, "Soundness gate", None)
def test_c10_soundness_gate():
    equivalents = 0
    for p, q in UNORDERED_PAIRS:
        m, n = _incidence(p), _incidence(q)
        res = analyze_equivalence(m, n)
        if res.equivalent:
            equivalents += 1
            assert recheck_unordered(certificate_to_json(res.certificate), m.tolist(), n.tolist()), (p, q)
    for p, q in ORDERED_PAIRS:
        s1, s2 = (parse_sub((DATA / x).read_text()) for x in (p, q))
        res = analyze_ordered_equivalence(s1, s2)
        if res.equivalent:
            equivalents += 1
            assert recheck_ordered(certificate_to_json(res.certificate), s1.images, s2.images), (p, q)
    x, y = compose(SIGMA2, power(SIGMA1, 2)), compose(SIGMA1, power(SIGMA2, 2))
    res = fib_ordered_equivalence(x, y)
    assert recheck_ordered(certificate_to_json(res.certificate), x.images, y.images)
    assert equivalents >= 10


if __name__ == "__main__":
    import sys
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    failed = 0
    for t in tests:
        try:
            t()
        except Exception:
            failed += 1
    for k in sorted(RESULTS):
        print(RESULTS[k])
    sys.exit(1 if failed else 0)
