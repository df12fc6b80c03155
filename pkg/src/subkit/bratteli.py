"""Unordered Bratteli diagrams, telescoping and equivalence certificates.

Orientation.  A transition matrix ``T`` between levels ``n`` and ``n + 1`` is
an incidence count of shape ``|V_n| x |V_(n+1)|``: ``T[i][j]`` edges run from
vertex ``i`` at level ``n`` to vertex ``j`` at level ``n + 1``, and labels obey
``d_(n+1) = T.T @ d_n``.  ``stationary_diagram(M)`` uses ``M`` itself as
the incidence matrix at every level, which is the chain-system convention
(``A_1 --M--> A_2 --M--> ...``) used for state splitting and supernatural
numbers.  For a substitution with letter-count matrix ``M`` (rows are the
images) the incidence is ``M.T`` and the labels are word lengths
``d_(n+1) = M @ d_n``; :func:`substitution_diagram` builds that one.  The
two orientations agree for symmetric ``M`` and the non-supernatural
invariants do not see the difference.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cancel import CancelToken, NEVER
from .exact_matrix import (
    ExactMatrix, MatrixError, PreconditionError, Compatibility, determinant,
    field_compatible, integer_matrix, inverse, is_primitive, matrix_power,
    non_nilpotent_rank, pf_report, purely_aperiodic, rank,
)


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class BratteliDiagram:
    """A labelled diagram materialized to ``depth`` levels past the base.

    Stationary diagrams carry their ``generator`` and answer
    :meth:`transition` for any level.
    """
    transitions: Tuple[ExactMatrix, ...]
    labels: Tuple[Tuple[int, ...], ...]
    generator: Optional[ExactMatrix] = None

    @property
    def stationary(self) -> bool:
        return self.generator is not None

    @property
    def depth(self) -> int:
        return len(self.transitions)

    def transition(self, n: int) -> ExactMatrix:
        if self.generator is not None:
            return self.generator
        if not 0 <= n < len(self.transitions):
            raise DiagramError("level %d beyond materialized depth %d" % (n, self.depth))
        return self.transitions[n]

    def product(self, a: int, b: int) -> ExactMatrix:
        """Incidence matrix of all paths from level ``a`` to level ``b``."""
        if self.generator is not None:
            return matrix_power(self.generator, b - a)
        out = ExactMatrix.identity(len(self.labels[a]))
        for n in range(a, b):
            out = out @ self.transition(n)
        return out

    def label(self, n: int) -> Tuple[int, ...]:
        if n < len(self.labels):
            return self.labels[n]
        if self.generator is None:
            raise DiagramError("level %d beyond materialized depth %d" % (n, self.depth))
        d = self.labels[-1]
        for _ in range(len(self.labels) - 1, n):
            d = self.generator.T.apply(d)
        return d

    def materialize(self, depth: int) -> "BratteliDiagram":
        if self.generator is None:
            if depth > self.depth:
                raise DiagramError("cannot extend a non-stationary diagram")
            return BratteliDiagram(self.transitions[:depth], self.labels[:depth + 1])
        return stationary_diagram(self.generator, depth)

    def check_label_rule(self) -> bool:
        for n, t in enumerate(self.transitions):
            if t.T.apply(self.labels[n]) != self.labels[n + 1]:
                return False
        return True


def _label_sequence(transitions: Sequence[ExactMatrix], base: Sequence[int]):
    labels = [tuple(base)]
    for t in transitions:
        labels.append(t.T.apply(labels[-1]))
    return tuple(labels)


def stationary_diagram(m: ExactMatrix, depth: int = 5) -> BratteliDiagram:
    """Stationary diagram with incidence ``m`` at every level and unit base labels."""
    m.validate_substitution()
    transitions = (m,) * depth
    return BratteliDiagram(transitions, _label_sequence(transitions, (1,) * m.rows), m)


def substitution_diagram(letter_counts: ExactMatrix, depth: int = 5) -> BratteliDiagram:
    """Diagram of a substitution: labels are the lengths of iterated images."""
    return stationary_diagram(letter_counts.T, depth)


def diagram_from_transitions(transitions: Sequence[ExactMatrix]) -> BratteliDiagram:
    if not transitions:
        raise DiagramError("need at least one transition")
    for a, b in zip(transitions, transitions[1:]):
        if a.cols != b.rows:
            raise DiagramError("consecutive transitions do not fit: %s then %s" % (a.shape, b.shape))
    for t in transitions:
        t.validate_transition()
    transitions = tuple(transitions)
    return BratteliDiagram(transitions, _label_sequence(transitions, (1,) * transitions[0].rows))


def telescope(d: BratteliDiagram, cuts: Sequence[int]) -> BratteliDiagram:
    cuts = list(cuts)
    if not cuts or cuts[0] != 0:
        raise DiagramError("telescoping cuts must start at level 0")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise DiagramError("telescoping cuts must be strictly increasing")
    if d.stationary and len(cuts) > 1:
        strides = {b - a for a, b in zip(cuts, cuts[1:])}
        if len(strides) == 1:
            return stationary_diagram(matrix_power(d.generator, strides.pop()), len(cuts) - 1)
    transitions = tuple(d.product(a, b) for a, b in zip(cuts, cuts[1:]))
    labels = tuple(d.label(c) for c in cuts)
    return BratteliDiagram(transitions, labels)


def telescope_stride(d: BratteliDiagram, k: int, levels: Optional[int] = None) -> BratteliDiagram:
    if k < 1:
        raise DiagramError("stride must be positive")
    levels = d.depth if levels is None else levels
    return telescope(d, [k * i for i in range(levels + 1)])


# -- isomorphism ---------------------------------------------------------

def isomorphic_stationary(m: ExactMatrix, n: ExactMatrix) -> Optional[Tuple[int, ...]]:
    """A relabeling ``rho`` with ``m[i][j] == n[rho[i]][rho[j]]``, or ``None``.

    Equivalently ``m = P^-1 n P`` for ``P = ExactMatrix.permutation(inverse(rho))``.
    """
    if m.shape != n.shape or not m.is_square:
        return None
    k = m.rows

    def sig(a, i):
        return (a[i][i], tuple(sorted(a[i])), tuple(sorted(r[i] for r in a)))

    sm = [sig(m, i) for i in range(k)]
    sn = [sig(n, i) for i in range(k)]
    if sorted(sm) != sorted(sn):
        return None
    rho = [-1] * k
    used = [False] * k

    def extend(i):
        if i == k:
            return True
        for cand in range(k):
            if used[cand] or sn[cand] != sm[i]:
                continue
            if all(m[i][j] == n[cand][rho[j]] and m[j][i] == n[rho[j]][cand] for j in range(i)):
                rho[i] = cand
                used[cand] = True
                if extend(i + 1):
                    return True
                used[cand] = False
        return False

    return tuple(rho) if extend(0) else None


def invert_permutation(p: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


# -- supernatural numbers ----------------------------------------------------

INF = math.inf


@dataclass(frozen=True)
class SupernaturalNumber:
    exponents: Tuple[Tuple[int, float], ...]

    @classmethod
    def from_dict(cls, d: Dict[int, float]) -> "SupernaturalNumber":
        return cls(tuple(sorted((p, e) for p, e in d.items() if e)))

    def as_dict(self) -> Dict[int, float]:
        return dict(self.exponents)

    def __str__(self):
        if not self.exponents:
            return "1"
        parts = []
        for p, e in self.exponents:
            if e == INF:
                parts.append("%d^∞" % p)
            elif e == 1:
                parts.append(str(p))
            else:
                parts.append("%d^%d" % (p, e))
        return "·".join(parts)

    def to_json(self):
        return {str(p): ("inf" if e == INF else int(e)) for p, e in self.exponents}


def _factorint(n: int) -> Dict[int, int]:
    from sympy import factorint
    return {int(p): int(e) for p, e in factorint(n).items()}


def rank_one_factors(m: ExactMatrix) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """``(c, r)`` with ``m = c r^T``, ``r`` non-negative with gcd 1; ``None`` unless rank 1."""
    if not m.is_nonnegative() or rank(m) != 1:
        return None
    i = next(i for i in range(m.rows) if any(m[i]))
    row = m[i]
    g = 0
    for x in row:
        g = math.gcd(g, x)
    r = tuple(x // g for x in row)
    j = next(j for j in range(m.cols) if r[j])
    c = tuple(m[k][j] // r[j] for k in range(m.rows))
    if any(c[k] * r[l] != m[k][l] for k in range(m.rows) for l in range(m.cols)):
        return None
    return c, r


def supernatural(m: ExactMatrix) -> Optional[SupernaturalNumber]:
    """Supernatural number of the stationary diagram with incidence ``m``.

    Defined when ``m`` has rank 1: with ``m = c r^T`` the single-vertex
    levels have sizes ``sum(c) * s**k`` where ``s = r . c``.
    """
    if not m.is_square:
        return None
    f = rank_one_factors(m)
    if f is None:
        return None
    c, r = f
    s = sum(a * b for a, b in zip(r, c))
    exps: Dict[int, float] = {p: INF for p in _factorint(s)}
    for p, e in _factorint(sum(c)).items():
        if p not in exps:
            exps[p] = e
    return SupernaturalNumber.from_dict(exps)


# -- certificates -----------------------------------------------------------

@dataclass(frozen=True)
class UnorderedCertificate:
    """An interleaving chain of incidence matrices.

    The infinite chain is ``chain[:period_start]`` followed by
    ``chain[period_start:]`` repeated forever; ``period_start=None`` marks a
    finite prefix.  Chain level ``i`` sits before ``chain[i]``.  ``cuts1`` and
    ``cuts2`` are the levels at which the chain telescopes to the first and
    second diagram; cuts at or after ``period_start`` repeat with the period.
    """
    chain: Tuple[ExactMatrix, ...]
    cuts1: Tuple[int, ...]
    cuts2: Tuple[int, ...]
    period_start: Optional[int] = 0
    odd_powers: Tuple[int, ...] = ()
    even_powers: Tuple[int, ...] = ()

    @property
    def period(self) -> Optional[int]:
        if self.period_start is None:
            return None
        return len(self.chain) - self.period_start

    def matrix(self, k: int) -> ExactMatrix:
        if k < len(self.chain):
            return self.chain[k]
        if self.period_start is None:
            raise DiagramError("finite certificate has no level %d" % k)
        return self.chain[self.period_start + (k - self.period_start) % self.period]

    def cut_levels(self, which: int, upto: int) -> List[int]:
        cuts = self.cuts1 if which == 1 else self.cuts2
        if self.period_start is None:
            return [c for c in cuts if c <= upto]
        s, p = self.period_start, self.period
        base = [c for c in cuts if c < s] + sorted({s + (c - s) % p for c in cuts if c >= s})
        out = set(c for c in base if c < s)
        for c in base:
            if c >= s:
                x = c
                while x <= upto:
                    out.add(x)
                    x += p
        return sorted(out)


class CertificateError(ValueError):
    pass


def _check_shapes(cert: UnorderedCertificate):
    if not cert.chain:
        raise CertificateError("empty chain")
    n = len(cert.chain) if cert.period_start is None else len(cert.chain) + cert.period
    for k in range(n - 1):
        a, b = cert.matrix(k), cert.matrix(k + 1)
        if a.cols != b.rows:
            raise CertificateError("chain[%d] is %dx%d but chain[%d] is %dx%d"
                                   % ((k,) + a.shape + (k + 1,) + b.shape))
    for k, c in enumerate(cert.chain):
        try:
            c.validate_transition()
        except MatrixError as e:
            raise CertificateError("chain[%d]: %s" % (k, e)) from None
    if cert.period_start is not None and not 0 <= cert.period_start < len(cert.chain):
        raise CertificateError("period_start out of range")
    if not cert.cuts1 or not cert.cuts2:
        raise CertificateError("both cut lists must be nonempty")


def _find_level(d: BratteliDiagram, labels, limit=64) -> Optional[int]:
    labels = tuple(labels)
    n = len(d.labels) if not d.stationary else limit
    total = sum(labels)
    for a in range(n):
        la = d.label(a)
        if la == labels:
            return a
        if len(la) == len(labels) and sum(la) > total and d.stationary:
            break
    return None


def _match_segment(prod: ExactMatrix, d: BratteliDiagram, start: int,
                   limit: int = 256) -> Optional[int]:
    """Level ``b > start`` with ``d.product(start, b) == prod``."""
    if d.stationary:
        g = d.generator
        if g.shape != prod.shape:
            return None
        total = sum(map(sum, prod))
        cur = g
        for p in range(1, limit + 1):
            if cur == prod:
                return start + p
            if sum(map(sum, cur)) > total:
                return None
            cur = cur @ g
        return None
    for b in range(start + 1, d.depth + 1):
        if d.product(start, b) == prod:
            return b
    return None


def certificate_powers(cert: UnorderedCertificate, d1: BratteliDiagram,
                       d2: BratteliDiagram) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Per-segment level spans for both diagrams, or ``None`` if a check fails."""
    _check_shapes(cert)
    if cert.period_start is None:
        top = len(cert.chain)
    else:
        top = cert.period_start + 3 * cert.period
    c1, c2 = cert.cut_levels(1, top), cert.cut_levels(2, top)
    if cert.period_start is not None:
        s, p = cert.period_start, cert.period
        for cs in (c1, c2):
            if not any(s <= c < s + p for c in cs):
                return None
    if set(c1) & set(c2):
        return None
    merged = sorted([(c, 1) for c in c1] + [(c, 2) for c in c2])
    if any(a[1] == b[1] for a, b in zip(merged, merged[1:])):
        return None

    labels = [(1,) * cert.chain[0].rows]
    for k in range(top):
        labels.append(cert.matrix(k).T.apply(labels[-1]))

    spans = []
    for cs, d in ((c1, d1), (c2, d2)):
        level = _find_level(d, labels[cs[0]])
        if level is None:
            return None
        powers = []
        for a, b in zip(cs, cs[1:]):
            prod = cert.matrix(a)
            for k in range(a + 1, b):
                prod = prod @ cert.matrix(k)
            nxt = _match_segment(prod, d, level)
            if nxt is None:
                return None
            powers.append(nxt - level)
            level = nxt
        spans.append(tuple(powers))
    return spans[0], spans[1]


def verify_certificate(cert: UnorderedCertificate, d1: BratteliDiagram,
                       d2: BratteliDiagram) -> bool:
    """Exact check of every product identity and the label rule.

    Malformed chains raise :class:`CertificateError`.
    """
    return certificate_powers(cert, d1, d2) is not None


def _with_powers(cert: UnorderedCertificate, d1, d2) -> Optional[UnorderedCertificate]:
    pw = certificate_powers(cert, d1, d2)
    if pw is None:
        return None
    return UnorderedCertificate(cert.chain, cert.cuts1, cert.cuts2, cert.period_start, pw[0], pw[1])


# -- state splitting and enlargement ------------------------------------------

def state_split(m: ExactMatrix, n_factor: ExactMatrix, s_factor: ExactMatrix):
    """``m = N S`` with unit column sums in ``N``  ->  ``(S N, certificate)``."""
    for x, name in ((n_factor, "N"), (s_factor, "S")):
        if not x.is_nonnegative():
            raise MatrixError("%s has a negative entry" % name)
    if n_factor @ s_factor != m:
        raise MatrixError("N S does not reproduce the matrix")
    if any(c != 1 for c in n_factor.col_sums()):
        raise MatrixError("columns of N must sum to one")
    if 0 in n_factor.row_sums():
        raise MatrixError("N has a zero row")
    d = s_factor @ n_factor
    cert = UnorderedCertificate((n_factor, s_factor), (0,), (1,), 0)
    cert = _with_powers(cert, stationary_diagram(m), stationary_diagram(d))
    if cert is None:
        raise MatrixError("split factors do not give valid transitions")
    return d, cert


@dataclass(frozen=True)
class Enlargement:
    matrix: ExactMatrix
    power: int
    n_factor: ExactMatrix
    s_factor: ExactMatrix
    certificate: UnorderedCertificate


def enlarge(m: ExactMatrix, target: int) -> Enlargement:
    """Equivalent primitive matrix on ``target`` letters via one state split."""
    n = m.rows
    if target <= n:
        raise MatrixError("target must exceed the current size %d" % n)
    ok, _ = is_primitive(m)
    if not ok:
        raise PreconditionError("enlarge needs a primitive matrix")
    k, mk = 1, m
    while min(x for r in mk for x in r) < target:
        k += 1
        mk = mk @ m
    extra = target - n
    # first row of m^k is split across 1 + extra vertices; the extra ones take a row of ones
    nf = [[1] * (extra + 1) + [0] * (n - 1)]
    for i in range(1, n):
        nf.append([0] * (extra + 1) + [int(j == i - 1) for j in range(n - 1)])
    sf = [[x - extra for x in mk[0]]] + [[1] * n for _ in range(extra)] + [list(mk[i]) for i in range(1, n)]
    nf, sf = ExactMatrix(nf), ExactMatrix(sf)
    d, _ = state_split(mk, nf, sf)
    cert = _with_powers(UnorderedCertificate((nf, sf), (0,), (1,), 0),
                        stationary_diagram(m), stationary_diagram(d))
    return Enlargement(d, k, nf, sf, cert)


# -- the invariant battery and bounded search ----------------------------------

@dataclass(frozen=True)
class Budget:
    max_power: int = 8
    max_alphabet: int = 8
    max_chain: int = 12

    @classmethod
    def preset(cls, name: Optional[str] = None) -> "Budget":
        name = name or os.environ.get("SUBKIT_BUDGET_PRESET", "default")
        if name == "small":
            return cls(4, 4, 8)
        if name == "large":
            return cls(12, 10, 16)
        if name == "default":
            return cls()
        raise ValueError("unknown budget preset %r" % name)


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: str  # "equivalent" | "distinguished" | "unknown"
    certificate: object = None
    invariant: Optional[str] = None
    invariants: Dict[str, object] = field(default_factory=dict)
    method: Optional[str] = None

    @property
    def equivalent(self) -> bool:
        return self.verdict == "equivalent"


def invariant_battery(m: ExactMatrix, n: ExactMatrix) -> Tuple[Optional[str], Dict[str, object]]:
    """First distinguishing invariant name (or ``None``) and the computed values.

    Every invariant is evaluated; ``values["failures"]`` lists all that differ
    in battery order.
    """
    values: Dict[str, object] = {}
    failures: List[str] = []
    pm, pn = is_primitive(m)[0], is_primitive(n)[0]
    values["primitive"] = [pm, pn]
    if pm != pn:
        failures.append("primitivity")
    if m.shape == n.shape:
        im, in_ = determinant(m) != 0, determinant(n) != 0
        values["invertible"] = [im, in_]
        if im != in_:
            failures.append("invertibility")
    rm, rn = non_nilpotent_rank(m), non_nilpotent_rank(n)
    values["non_nilpotent_rank"] = [rm, rn]
    if rm != rn:
        failures.append("non-nilpotent rank")
    if pm and pn:
        am, an = purely_aperiodic(m), purely_aperiodic(n)
        values["purely_aperiodic"] = [am, an]
        if am != an:
            failures.append("purely-aperiodic")
        fc = field_compatible(m, n)
        values["field"] = fc.value
        if fc is Compatibility.INCOMPATIBLE:
            failures.append("field")
    sm, sn = supernatural(m), supernatural(n)
    values["supernatural"] = [str(sm) if sm else None, str(sn) if sn else None]
    if sm is not None and sn is not None and sm != sn:
        failures.append("supernatural")
    values["failures"] = failures
    return (failures[0] if failures else None), values


def _power_pairs(budget: Budget):
    pairs = [(p, q) for p in range(1, budget.max_power + 1) for q in range(1, budget.max_power + 1)]
    pairs.sort(key=lambda pq: (pq[0] + pq[1], pq))
    return pairs


def _conjugacy_certificate(m, n, budget, cancel):
    for p, q in _power_pairs(budget):
        cancel.check()
        if m.shape != n.shape or m.rows > 10:
            return None
        mp, nq = matrix_power(m, p), matrix_power(n, q)
        rho = isomorphic_stationary(nq, mp)
        if rho is None:
            continue
        pi = ExactMatrix.permutation(invert_permutation(rho))
        yield UnorderedCertificate((pi, pi.T @ mp), (0,), (1,), 0)


def _amalgamations(target: ExactMatrix, n: int, cancel):
    """Maps ``g: cols -> [n]`` whose fibres only merge identical columns."""
    k = target.rows
    cols = list(zip(*target))
    g = [-1] * k

    def rec(j):
        cancel.check()
        if j == k:
            if len(set(g)) == n:
                yield tuple(g)
            return
        for v in range(n):
            if all(g[i] != v or cols[i] == cols[j] for i in range(j)):
                g[j] = v
                yield from rec(j + 1)
        g[j] = -1

    yield from rec(0)


def _split_bridge(mp: ExactMatrix, nq: ExactMatrix, cancel):
    """``X`` (unit column sums) and ``Y`` with ``X Y = mp`` and ``Y X = nq``."""
    n, k = mp.rows, nq.rows
    if k < n:
        return
    for g in _amalgamations(nq, n, cancel):
        x = ExactMatrix([[int(g[j] == i) for j in range(k)] for i in range(n)])
        y_rows = []
        for i in range(k):
            row = []
            for l in range(n):
                j = g.index(l)
                row.append(nq[i][j])
            y_rows.append(row)
        y = ExactMatrix(y_rows)
        if 0 in y.row_sums() or 0 in y.col_sums():
            continue
        if x @ y == mp and y @ x == nq:
            yield x, y


def _split_certificates(m, n, budget, cancel):
    for p, q in _power_pairs(budget):
        if max(m.rows, n.rows) > budget.max_alphabet:
            return
        mp, nq = matrix_power(m, p), matrix_power(n, q)
        for x, y in _split_bridge(mp, nq, cancel):
            yield UnorderedCertificate((x, y), (0,), (1,), 0)
        for x, y in _split_bridge(nq, mp, cancel):
            yield UnorderedCertificate((x, y), (1,), (0,), 0)


def _divisor_list(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def _rank_one_certificates(m, n, budget, cancel):
    fm, fn = rank_one_factors(m), rank_one_factors(n)
    if fm is None or fn is None:
        return
    for (a, fa), (b, fb), swap in (((m, fm), (n, fn), False), ((n, fn), (m, fm), True)):
        c, r = fa
        c2, r2 = fb
        s = sum(x * y for x, y in zip(r, c))
        s2 = sum(x * y for x, y in zip(r2, c2))
        for p, q in _power_pairs(budget):
            cancel.check()
            if s ** p != s2 ** q:
                continue
            total = s ** p
            if total % (s * s2):
                continue
            gh = total // (s * s2)
            for g in _divisor_list(gh):
                h = gh // g
                for lvl in range(1, budget.max_power + 1):
                    if sum(c) * g != sum(c2) * s2 ** (lvl - 1):
                        continue
                    col = lambda v: ExactMatrix([[x] for x in v])
                    row = lambda v: ExactMatrix([list(v)])
                    chain = [col(c)]
                    if g != 1:
                        chain.append(ExactMatrix([[g]]))
                    chain.append(row(r2))
                    second = len(chain)
                    chain.append(col(c2))
                    if h != 1:
                        chain.append(ExactMatrix([[h]]))
                    chain.append(row(r))
                    cuts_a, cuts_b = (0,), (second,)
                    if swap:
                        cuts_a, cuts_b = cuts_b, cuts_a
                    yield UnorderedCertificate(tuple(chain), cuts_a, cuts_b, 0)


def analyze_equivalence(m: ExactMatrix, n: ExactMatrix, budget: Optional[Budget] = None,
                        cancel: CancelToken = NEVER) -> EquivalenceResult:
    """Invariant battery, then a bounded certificate search.

    Every returned certificate has passed :func:`verify_certificate`.
    """
    budget = budget or Budget.preset()
    m.validate_substitution()
    n.validate_substitution()
    name, values = invariant_battery(m, n)
    if name is not None:
        return EquivalenceResult("distinguished", invariant=name, invariants=values)
    d1, d2 = stationary_diagram(m), stationary_diagram(n)
    searches = (("conjugate powers", _conjugacy_certificate),
                ("state splitting", _split_certificates),
                ("rank-one bridge", _rank_one_certificates))
    for method, search in searches:
        for cert in search(m, n, budget, cancel) or ():
            if len(cert.chain) > budget.max_chain:
                continue
            checked = _with_powers(cert, d1, d2)
            if checked is not None:
                return EquivalenceResult("equivalent", checked, invariants=values, method=method)
    return EquivalenceResult("unknown", invariants=values)


def invertible_witness_certificate(m: ExactMatrix, n: ExactMatrix, j: ExactMatrix,
                                   ks: Sequence[int], ls: Sequence[int]) -> UnorderedCertificate:
    """Finite chain ``J, J^-1 M^k1, M^-k1 J N^l1, N^-l1 J^-1 M^k2, ...``.

    ``ks`` and ``ls`` are prefixes of the strictly increasing exponent
    sequences; ``len(ks) == len(ls) + 1``.  Raises :class:`CertificateError`
    when a chain entry is not a non-negative integer matrix.
    """
    if len(ks) != len(ls) + 1:
        raise CertificateError("need one more k than l")
    ji = inverse(j)

    def mul(*ms):
        out = ms[0]
        for x in ms[1:]:
            out = [[sum(a * b for a, b in zip(r, c)) for c in zip(*x)] for r in out]
        return out

    def as_int(rows, what):
        e = integer_matrix(rows)
        if e is None or not e.is_nonnegative():
            raise CertificateError("%s is not a non-negative integer matrix" % what)
        return e

    def pw(a, e):
        return matrix_power(a, e).tolist()

    def ipw(a, e):
        return inverse(matrix_power(a, e))

    chain = [j, as_int(mul(ji, pw(m, ks[0])), "J^-1 M^k1")]
    for i, l in enumerate(ls):
        chain.append(as_int(mul(ipw(m, ks[i]), j.tolist(), pw(n, l)), "C_%d" % (2 * i + 3)))
        chain.append(as_int(mul(ipw(n, l), ji, pw(m, ks[i + 1])), "C_%d" % (2 * i + 4)))
    cuts1 = tuple(range(0, len(chain) + 1, 2))
    cuts2 = tuple(range(1, len(chain) + 1, 2))
    return UnorderedCertificate(tuple(chain), cuts1, cuts2, None)
