import random

import pytest

from subkit.bratteli import (
    INF, Budget, CertificateError, DiagramError, SupernaturalNumber, UnorderedCertificate,
    analyze_equivalence, diagram_from_transitions, enlarge, invariant_battery,
    invertible_witness_certificate, isomorphic_stationary, stationary_diagram, state_split,
    substitution_diagram, supernatural, telescope, telescope_stride, verify_certificate,
)
from subkit.exact_matrix import ExactMatrix, MatrixError, PreconditionError, is_primitive, matrix_power

from oracles import conjugate_by_all_perms

E = ExactMatrix
F = E([[1, 1], [1, 0]])
N_PAPER = E([[1, 1, 0], [0, 0, 1]])
S_PAPER = E([[7, 4], [1, 1], [5, 3]])
M5 = E([[1, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 1, 1], [1, 0, 0, 0, 1]])
N5 = E([[0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [1, 0, 0, 0, 1], [1, 1, 0, 0, 0], [0, 0, 0, 1, 1]])


def assert_sound(res, m, n):
    if res.equivalent:
        assert verify_certificate(res.certificate, stationary_diagram(m), stationary_diagram(n))


def random_primitive(rng, size=4, top=3):
    while True:
        n = rng.randint(1, size)
        m = E([[rng.randint(0, top) for _ in range(n)] for _ in range(n)])
        if is_primitive(m)[0]:
            return m


# -- construction and labels

def test_stationary_labels():
    d = stationary_diagram(F, 4)
    assert d.labels == ((1, 1), (2, 1), (3, 2), (5, 3), (8, 5))
    assert d.label(9) == (89, 55)
    assert stationary_diagram(E([[6]]), 2).labels == ((1,), (6,), (36,))
    assert stationary_diagram(matrix_power(F, 2), 4).labels == ((1, 1), (3, 2), (8, 5), (21, 13), (55, 34))


def test_substitution_diagram_labels_are_lengths():
    # a -> aab, b -> b: lengths 3, 1 then 7, 1
    abel = E([[2, 1], [0, 1]])
    d = substitution_diagram(abel, 2)
    assert d.labels == ((1, 1), (3, 1), (7, 1))
    assert d.check_label_rule()


def test_stationary_rejects_zero_row():
    with pytest.raises(MatrixError):
        stationary_diagram(E([[1, 1], [0, 0]]))


def test_non_stationary_diagram():
    d = diagram_from_transitions([E([[1, 1]]), E([[1, 0, 1], [0, 1, 1]])])
    assert d.labels == ((1,), (1, 1), (1, 1, 2))
    assert d.check_label_rule()
    with pytest.raises(DiagramError):
        d.label(3)
    with pytest.raises(DiagramError):
        diagram_from_transitions([E([[1, 1]]), E([[1, 1]])])


# -- telescoping

def test_telescope_stride_two():
    t = telescope_stride(stationary_diagram(F, 8), 2, 4)
    assert t.generator == E([[2, 1], [1, 1]])
    assert t.labels == ((1, 1), (3, 2), (8, 5), (21, 13), (55, 34))


def test_telescope_stride_one_is_identity():
    d = stationary_diagram(F, 5)
    assert telescope_stride(d, 1) == d


def test_telescope_irregular_cuts():
    d = stationary_diagram(F, 6)
    t = telescope(d, (0, 1, 3, 6))
    assert t.transitions == (F, matrix_power(F, 2), matrix_power(F, 3))
    assert t.labels == (d.label(0), d.label(1), d.label(3), d.label(6))
    assert t.check_label_rule()


def test_telescope_bad_cuts():
    d = stationary_diagram(F)
    with pytest.raises(DiagramError):
        telescope(d, (0, 2, 2))
    with pytest.raises(DiagramError):
        telescope(d, (1, 2))


def test_telescope_law_random():
    rng = random.Random(17)
    for _ in range(30):
        m = random_primitive(rng)
        for k in range(1, 6):
            t = telescope_stride(stationary_diagram(m, 3 * k), k, 3)
            s = stationary_diagram(matrix_power(m, k), 3)
            assert t.generator == s.generator and t.labels == s.labels


def test_label_rule_after_random_telescoping():
    rng = random.Random(29)
    for _ in range(30):
        n = rng.randint(1, 3)
        ts, rows = [], n
        for _ in range(6):
            cols = rng.randint(1, 3)
            a = [[rng.randint(0, 2) for _ in range(cols)] for _ in range(rows)]
            for i in range(rows):
                a[i][rng.randrange(cols)] += 1
            for j in range(cols):
                a[rng.randrange(rows)][j] += 1
            ts.append(E(a))
            rows = cols
        d = diagram_from_transitions(ts)
        cuts = [0] + sorted(rng.sample(range(1, 7), rng.randint(1, 4)))
        t = telescope(d, cuts)
        assert t.check_label_rule()
        assert t.labels == tuple(d.labels[c] for c in cuts)


# -- isomorphism

def test_isomorphism_examples():
    j = isomorphic_stationary(F, E([[0, 1], [1, 1]]))
    assert j == (1, 0)
    assert isomorphic_stationary(F, F) == (0, 1)
    assert isomorphic_stationary(F, matrix_power(F, 2)) is None
    assert isomorphic_stationary(F, E([[1]])) is None


def test_isomorphism_against_brute_force():
    rng = random.Random(41)
    for _ in range(60):
        k = rng.randint(1, 5)
        m = [[rng.randint(0, 2) for _ in range(k)] for _ in range(k)]
        if rng.random() < 0.6:
            perm = list(range(k))
            rng.shuffle(perm)
            n = [[0] * k for _ in range(k)]
            for i in range(k):
                for j in range(k):
                    n[perm[i]][perm[j]] = m[i][j]
        else:
            n = [[rng.randint(0, 2) for _ in range(k)] for _ in range(k)]
        rho = isomorphic_stationary(E(m), E(n))
        found = conjugate_by_all_perms(m, n)
        assert (rho is None) == (not found)
        if rho is not None:
            assert rho in found


# -- supernatural numbers

def test_supernatural_examples():
    assert supernatural(E([[1, 2], [1, 2]])) == SupernaturalNumber.from_dict({2: 1, 3: INF})
    assert supernatural(E([[1, 1], [2, 2]])) == SupernaturalNumber.from_dict({3: INF})
    six = SupernaturalNumber.from_dict({2: INF, 3: INF})
    for m in ([[3, 3], [3, 3]], [[2, 2], [4, 4]], [[6]]):
        assert supernatural(E(m)) == six
    assert str(supernatural(E([[1, 2], [1, 2]]))) == "2·3^∞"
    assert supernatural(F) is None


def test_supernatural_matches_level_sizes():
    # through the single middle vertex, sizes run sum(c) * s^k for m = c r^T
    from math import gcd
    from sympy import factorint
    for m in ([[1, 2], [1, 2]], [[1, 1], [2, 2]], [[2, 2], [4, 4]], [[1, 4], [2, 8]]):
        sn = supernatural(E(m)).as_dict()
        row = m[0]
        g = gcd(*row)
        c = [m[i][0] * g // row[0] for i in range(len(m))]
        sizes = []
        for k in range(0, 7):
            d = stationary_diagram(E(m), k).label(k)
            sizes.append(sum(x * y for x, y in zip(d, c)))
        early, late = factorint(sizes[0]), factorint(sizes[-1])
        for p in set(early) | set(late):
            if sn.get(p) == INF:
                assert late.get(p, 0) > early.get(p, 0)
            else:
                assert late.get(p, 0) == early.get(p, 0) == sn.get(p, 0)


# -- state splitting and enlargement

def test_state_split_paper_example():
    d, cert = state_split(matrix_power(F, 5), N_PAPER, S_PAPER)
    assert d == E([[7, 7, 4], [1, 1, 1], [5, 5, 3]])
    assert is_primitive(d)[0]
    assert verify_certificate(cert, stationary_diagram(matrix_power(F, 5)), stationary_diagram(d))


def test_state_split_errors():
    with pytest.raises(MatrixError):
        state_split(matrix_power(F, 4), N_PAPER, S_PAPER)
    col = E([[3], [3]])
    with pytest.raises(MatrixError):
        state_split(E([[3, 3], [3, 3]]), col, E([[1, 1]]))


def test_state_split_identity():
    i2 = E.identity(2)
    d, cert = state_split(i2, i2, i2)
    assert d == i2


def test_state_split_preserves_primitivity():
    rng = random.Random(5)
    done = 0
    while done < 25:
        m = random_primitive(rng, size=3, top=4)
        k = m.rows
        # split row 0 of m into two non-negative rows
        r0 = m[0]
        if sum(r0) < 2:
            continue
        a = [rng.randint(0, x) for x in r0]
        b = [x - y for x, y in zip(r0, a)]
        if not any(a) or not any(b):
            continue
        nf = E([[1, 1] + [0] * (k - 1)] + [[0, 0] + [int(j == i) for j in range(1, k)] for i in range(1, k)])
        sf = E([a, b] + [list(m[i]) for i in range(1, k)])
        d, cert = state_split(m, nf, sf)
        assert is_primitive(d)[0]
        assert verify_certificate(cert, stationary_diagram(m), stationary_diagram(d))
        done += 1


def test_enlarge_three():
    e = enlarge(F, 3)
    assert e.power == 5
    assert e.matrix == E([[7, 7, 4], [1, 1, 1], [5, 5, 3]])
    assert verify_certificate(e.certificate, stationary_diagram(F), stationary_diagram(e.matrix))


@pytest.mark.parametrize("m,target", [(F, 4), (E([[2]]), 2), (E([[1, 2], [1, 1]]), 5)])
def test_enlarge_general(m, target):
    e = enlarge(m, target)
    assert e.matrix.shape == (target, target)
    assert is_primitive(e.matrix)[0]
    assert all(c == 1 for c in e.n_factor.col_sums())
    assert verify_certificate(e.certificate, stationary_diagram(m), stationary_diagram(e.matrix))


def test_enlarge_errors():
    with pytest.raises(MatrixError):
        enlarge(F, 2)
    with pytest.raises(PreconditionError):
        enlarge(E.identity(2), 3)


# -- certificates

def test_certificate_negative_control():
    c = E([[1, 2], [0, 1]])
    cert = UnorderedCertificate((c, c.T), (0,), (1,), 0)
    assert not verify_certificate(cert, stationary_diagram(F), stationary_diagram(F))


def test_six_bridge_certificate():
    chain = (E([[3], [3]]), E([[1, 1]]), E([[2], [4]]), E([[1, 1]]))
    # repeating the chain would need [2;4][1 1] == [[3,3],[3,3]]
    cert = UnorderedCertificate(chain, (0, 2), (1, 3), 0)
    d33, d6 = stationary_diagram(E([[3, 3], [3, 3]])), stationary_diagram(E([[6]]))
    assert not verify_certificate(cert, d33, d6)
    d24 = stationary_diagram(E([[2, 2], [4, 4]]))
    bridge = UnorderedCertificate(chain, (0,), (2,), 0)
    assert verify_certificate(bridge, d33, d24)
    res = analyze_equivalence(E([[3, 3], [3, 3]]), E([[2, 2], [4, 4]]))
    assert res.equivalent and res.method == "rank-one bridge"
    assert verify_certificate(res.certificate, d33, d24)


def test_malformed_certificate():
    cert = UnorderedCertificate((F, E([[1, 1, 1]])), (0,), (1,), 0)
    with pytest.raises(CertificateError):
        verify_certificate(cert, stationary_diagram(F), stationary_diagram(F))


def test_invertible_witness():
    cert = invertible_witness_certificate(F, F, E.identity(2), (1, 3, 5), (2, 4))
    assert len(cert.chain) == 6
    assert verify_certificate(cert, stationary_diagram(F), stationary_diagram(F))
    with pytest.raises(CertificateError):
        invertible_witness_certificate(F, F, E.identity(2), (3, 4), (2,))


# -- the analyzer

def test_analyze_examples():
    m12, m21 = E([[1, 2], [1, 2]]), E([[1, 1], [2, 2]])
    res = analyze_equivalence(m12, m21)
    assert res.verdict == "distinguished" and res.invariant == "supernatural"
    assert res.invariants["supernatural"] == ["2·3^∞", "3^∞"]

    res = analyze_equivalence(F, E([[2, 2], [2, 2]]))
    assert res.verdict == "distinguished"
    assert "purely-aperiodic" in res.invariants["failures"]
    assert res.invariant == "invertibility"

    for k in (2, 3):
        res = analyze_equivalence(F, matrix_power(F, k))
        assert res.equivalent and res.method == "conjugate powers"
        assert_sound(res, F, matrix_power(F, k))

    res = analyze_equivalence(E([[3, 3], [3, 3]]), E([[6]]))
    assert res.equivalent
    assert_sound(res, E([[3, 3], [3, 3]]), E([[6]]))


def test_analyze_primitivity_mismatch():
    res = analyze_equivalence(F, E.identity(2))
    assert res.invariant == "primitivity"


def test_analyze_permutation_conjugates():
    rng = random.Random(13)
    for _ in range(20):
        m = random_primitive(rng, size=4)
        perm = list(range(m.rows))
        rng.shuffle(perm)
        p = E.permutation(perm)
        n = p.T @ m @ p
        res = analyze_equivalence(m, n)
        assert res.equivalent
        assert_sound(res, m, n)


def test_analyze_split_pair():
    d = E([[7, 7, 4], [1, 1, 1], [5, 5, 3]])
    for a, b in ((F, d), (d, F)):
        res = analyze_equivalence(a, b)
        assert res.equivalent
        assert_sound(res, a, b)


def test_five_by_five_pair_not_distinguished():
    name, values = invariant_battery(M5, N5)
    assert name is None and values["failures"] == []
    res = analyze_equivalence(M5, N5, Budget.preset("small"))
    assert res.verdict in ("equivalent", "unknown")
    assert_sound(res, M5, N5)


def test_budget_presets(monkeypatch):
    assert Budget.preset("small") == Budget(4, 4, 8)
    monkeypatch.setenv("SUBKIT_BUDGET_PRESET", "large")
    assert Budget.preset() == Budget(12, 10, 16)
    with pytest.raises(ValueError):
        Budget.preset("huge")


def test_soundness_on_random_pairs():
    rng = random.Random(99)
    for _ in range(40):
        m = random_primitive(rng, size=3)
        n = random_primitive(rng, size=3) if rng.random() < 0.5 else matrix_power(m, rng.randint(1, 3))
        res = analyze_equivalence(m, n, Budget.preset("small"))
        assert_sound(res, m, n)
