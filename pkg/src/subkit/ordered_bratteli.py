"""Ordered Bratteli diagrams built from substitutions.

An ordered diagram is stored as a chain of rectangular substitutions:
``maps[n]`` sends each vertex of level ``n + 1`` to the ordered word of
sources of its incoming edges at level ``n``.  The minimal incoming edge is
the first letter and the maximal one the last.  Composing
``maps[a] o ... o maps[b - 1]`` gives the telescoped order, where paths are
compared by the highest level at which they differ.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .bratteli import (
    BratteliDiagram, CertificateError, DiagramError, EquivalenceResult,
    diagram_from_transitions, invariant_battery, substitution_diagram,
)
from .cancel import CancelToken, NEVER
from .exact_matrix import PreconditionError, is_primitive
from .words import (
    Alphabet, AlphabetError, Substitution, Word, abelianize, compose, compose_chain,
    cycles, first_letter_map, last_letter_map, power,
)


@dataclass(frozen=True)
class OrderedDiagram:
    maps: Tuple[Substitution, ...]
    generator: Optional[Substitution] = None

    @property
    def depth(self) -> int:
        return len(self.maps)

    @property
    def stationary(self) -> bool:
        return self.generator is not None

    def map(self, n: int) -> Substitution:
        if self.generator is not None:
            return self.generator
        if not 0 <= n < len(self.maps):
            raise DiagramError("level %d beyond materialized depth %d" % (n, self.depth))
        return self.maps[n]

    @property
    def base(self) -> BratteliDiagram:
        if self.generator is not None:
            return substitution_diagram(abelianize(self.generator), self.depth)
        return diagram_from_transitions([abelianize(m).T for m in self.maps])

    @property
    def orders(self) -> Tuple[Tuple[Word, ...], ...]:
        """Per level ``n >= 1``, per vertex, the ordered source indices."""
        return tuple(m.images for m in self.maps)

    def vertices(self, n: int) -> int:
        if n == 0:
            return len(self.map(0).codomain)
        return len(self.map(n - 1).domain)


def ordered_from_substitution(s: Substitution, depth: int = 5) -> OrderedDiagram:
    if not s.is_square:
        raise AlphabetError("ordered diagrams need a square substitution")
    return OrderedDiagram((s,) * depth, s)


def ordered_from_maps(maps: Sequence[Substitution]) -> OrderedDiagram:
    maps = tuple(maps)
    if not maps:
        raise DiagramError("need at least one map")
    for lo, hi in zip(maps, maps[1:]):
        if len(lo.domain) != len(hi.codomain):
            raise DiagramError("level alphabets do not fit")
    return OrderedDiagram(maps)


def ordered_telescope(d: OrderedDiagram, cuts: Sequence[int]) -> OrderedDiagram:
    cuts = list(cuts)
    if not cuts or cuts[0] != 0:
        raise DiagramError("telescoping cuts must start at level 0")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise DiagramError("telescoping cuts must be strictly increasing")
    if len(cuts) == 1:
        raise DiagramError("need at least two cut levels")
    strides = {b - a for a, b in zip(cuts, cuts[1:])}
    if d.stationary and len(strides) == 1:
        return ordered_from_substitution(power(d.generator, strides.pop()), len(cuts) - 1)
    return OrderedDiagram(tuple(compose_chain([d.map(n) for n in range(a, b)])
                                for a, b in zip(cuts, cuts[1:])))


# -- finite paths and the successor map ----------------------------------------

@dataclass(frozen=True)
class FinitePath:
    """A path from level 0 to level ``len(ranks)`` ending at ``vertex``.

    ``ranks[i]`` is the 0-based rank of the edge entering level ``i + 1``
    within its range vertex's order word.
    """
    vertex: int
    ranks: Tuple[int, ...]
    start_level: int = 0

    @property
    def end_level(self) -> int:
        return self.start_level + len(self.ranks)


def path_vertices(d: OrderedDiagram, p: FinitePath) -> List[int]:
    """Vertices ``v_0 .. v_k`` visited by ``p``; raises on an invalid path."""
    if p.start_level != 0:
        raise DiagramError("paths must start at the base level")
    k = len(p.ranks)
    if not 0 <= p.vertex < d.vertices(k):
        raise DiagramError("end vertex %d out of range" % p.vertex)
    vs = [p.vertex]
    for level in range(k, 0, -1):
        word = d.map(level - 1).images[vs[-1]]
        r = p.ranks[level - 1]
        if not 0 <= r < len(word):
            raise DiagramError("rank %d at level %d exceeds in-degree %d" % (r, level, len(word)))
        vs.append(word[r])
    return vs[::-1]


def minimal_path(d: OrderedDiagram, vertex: int, length: int) -> FinitePath:
    return FinitePath(vertex, (0,) * length)


def maximal_path(d: OrderedDiagram, vertex: int, length: int) -> FinitePath:
    ranks = [0] * length
    v = vertex
    for level in range(length, 0, -1):
        word = d.map(level - 1).images[v]
        ranks[level - 1] = len(word) - 1
        v = word[-1]
    return FinitePath(vertex, tuple(ranks))


def vershik_successor(d: OrderedDiagram, p: FinitePath) -> Optional[FinitePath]:
    vs = path_vertices(d, p)
    ranks = list(p.ranks)
    for i, r in enumerate(ranks):
        # edge i enters level i + 1 at vertex vs[i + 1]
        if r + 1 < len(d.map(i).images[vs[i + 1]]):
            ranks[i] = r + 1
            for j in range(i):
                ranks[j] = 0
            return FinitePath(p.vertex, tuple(ranks), p.start_level)
    return None


def path_key(p: FinitePath) -> Tuple[int, ...]:
    """Sort key for paths into one vertex: the highest differing edge decides."""
    return tuple(reversed(p.ranks))


# -- maximal and minimal infinite paths -------------------------------------------

@dataclass(frozen=True)
class PathCounts:
    max_count: int
    min_count: int
    max_cycle_vertices: Tuple[int, ...]
    min_cycle_vertices: Tuple[int, ...]


def path_counts(s: Substitution) -> PathCounts:
    """Infinite maximal/minimal paths of the stationary ordered diagram of ``s``.

    A maximal path is a backward orbit of the last-letter map, and those
    biject with the map's cycle vertices.
    """
    mx = tuple(sorted(v for c in cycles(last_letter_map(s)) for v in c))
    mn = tuple(sorted(v for c in cycles(first_letter_map(s)) for v in c))
    return PathCounts(len(mx), len(mn), mx, mn)


def brute_force_path_counts(s: Substitution, depth: int) -> Tuple[int, int, bool]:
    """Depth-bounded counts: distinct half-depth prefixes of extremal paths.

    Returns ``(max_count, min_count, stable)`` where ``stable`` says the
    counts agree at ``depth`` and ``depth + 1``.
    """
    def count(f, d):
        n = len(f)
        prefixes = set()
        for v in range(n):
            chain = [v]
            for _ in range(d):
                chain.append(f[chain[-1]])
            # chain runs from level d down to level 0
            prefixes.add(tuple(chain[::-1][: d // 2 + 1]))
        return len(prefixes)

    last, first = last_letter_map(s), first_letter_map(s)
    a = (count(last, depth), count(first, depth))
    b = (count(last, depth + 1), count(first, depth + 1))
    return a[0], a[1], a == b


def max_min_disjoint(s: Substitution) -> bool:
    if not s.is_square:
        raise AlphabetError("needs a square substitution")
    if not is_primitive(abelianize(s))[0]:
        raise PreconditionError("substitution is not primitive")
    if all(len(w) == 1 for w in s.images):
        raise PreconditionError("every image has length one")
    for c in cycles(last_letter_map(s)):
        if all(len(s.images[v]) == 1 for v in c):
            return False
    return True


def taf_description(d: OrderedDiagram, depth: int) -> str:
    """The standard TAF chain: level algebras and ordered embeddings."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    labels = d.base.materialize(depth).labels if not d.stationary else \
        substitution_diagram(abelianize(d.generator), depth).labels
    lines = []
    for n in range(depth + 1):
        algebra = " ⊕ ".join("T_%d" % x for x in labels[n])
        if n == 0:
            lines.append(algebra)
            continue
        m = d.map(n - 1)
        emb = ", ".join("%s↦(%s)" % (m.domain.letters[v], ",".join(m.codomain.letters[x] for x in w))
                        for v, w in enumerate(m.images))
        lines.append("%s; %s" % (algebra, emb))
    return "\n".join(lines)


# -- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class OrderedCertificate:
    """Chain of rectangular substitutions in diagram order.

    ``chain[k]`` maps level ``k + 1`` to words over level ``k``; the
    telescoping between cut levels ``a < b`` is
    ``chain[a] o ... o chain[b - 1]``.  Cut and period conventions are those
    of :class:`subkit.bratteli.UnorderedCertificate`.
    """
    chain: Tuple[Substitution, ...]
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

    def map(self, k: int) -> Substitution:
        if k < len(self.chain):
            return self.chain[k]
        if self.period_start is None:
            raise CertificateError("finite certificate has no level %d" % k)
        return self.chain[self.period_start + (k - self.period_start) % self.period]

    def cut_levels(self, which: int, upto: int) -> List[int]:
        cuts = self.cuts1 if which == 1 else self.cuts2
        if self.period_start is None:
            return [c for c in cuts if c <= upto]
        s, p = self.period_start, self.period
        out = {c for c in cuts if c < s}
        for c in {s + (c - s) % p for c in cuts if c >= s}:
            while c <= upto:
                out.add(c)
                c += p
        return sorted(out)


def _check_chain(cert: OrderedCertificate):
    if not cert.chain:
        raise CertificateError("empty chain")
    if cert.period_start is not None and not 0 <= cert.period_start < len(cert.chain):
        raise CertificateError("period_start out of range")
    n = len(cert.chain) if cert.period_start is None else len(cert.chain) + cert.period
    for k in range(n - 1):
        lo, hi = cert.map(k), cert.map(k + 1)
        if len(lo.domain) != len(hi.codomain):
            raise CertificateError("chain[%d] has %d domain letters but chain[%d] has %d codomain letters"
                                   % (k, len(lo.domain), k + 1, len(hi.codomain)))
    for k, m in enumerate(cert.chain):
        used = {x for w in m.images for x in w}
        if len(used) != len(m.codomain):
            raise CertificateError("chain[%d] leaves a codomain letter without outgoing edges" % k)
    if not cert.cuts1 or not cert.cuts2:
        raise CertificateError("both cut lists must be nonempty")


def _match_power(u: Substitution, s: Substitution, limit: int = 64) -> Optional[int]:
    if len(u.domain) != len(s.domain) or len(u.codomain) != len(s.codomain):
        return None
    target = max(len(w) for w in u.images)
    cur = s
    for p in range(1, limit + 1):
        if cur.images == u.images:
            return p
        if max(len(w) for w in cur.images) > target:
            return None
        cur = compose(cur, s)
    return None


def ordered_certificate_powers(cert: OrderedCertificate, s1: Substitution, s2: Substitution):
    _check_chain(cert)
    top = len(cert.chain) if cert.period_start is None else cert.period_start + 3 * cert.period
    c1, c2 = cert.cut_levels(1, top), cert.cut_levels(2, top)
    if cert.period_start is not None:
        st, p = cert.period_start, cert.period
        if not all(any(st <= c < st + p for c in cs) for cs in (c1, c2)):
            return None
    if set(c1) & set(c2):
        return None
    merged = sorted([(c, 1) for c in c1] + [(c, 2) for c in c2])
    if any(a[1] == b[1] for a, b in zip(merged, merged[1:])):
        return None
    lengths = [(1,) * len(cert.chain[0].codomain)]
    for k in range(top):
        m = cert.map(k)
        lengths.append(tuple(sum(lengths[-1][x] for x in w) for w in m.images))
    spans = []
    for cs, s in ((c1, s1), (c2, s2)):
        # the first cut must carry the labels of some level of the diagram of s
        want = lengths[cs[0]]
        if len(want) != len(s.domain):
            return None
        cur, ok = tuple(1 for _ in s.images), False
        for _ in range(64):
            if cur == want:
                ok = True
                break
            if sum(cur) > sum(want):
                break
            cur = tuple(sum(cur[x] for x in w) for w in s.images)
        if not ok:
            return None
        powers = []
        for a, b in zip(cs, cs[1:]):
            seg = compose_chain([cert.map(k) for k in range(a, b)])
            p = _match_power(seg, s)
            if p is None:
                return None
            powers.append(p)
        spans.append(tuple(powers))
    return spans[0], spans[1]


def verify_ordered_certificate(cert: OrderedCertificate, s1: Substitution, s2: Substitution) -> bool:
    """Letter-level check of every segment composition and the base labels."""
    return ordered_certificate_powers(cert, s1, s2) is not None


def _with_powers(cert: OrderedCertificate, s1, s2) -> Optional[OrderedCertificate]:
    pw = ordered_certificate_powers(cert, s1, s2)
    if pw is None:
        return None
    return OrderedCertificate(cert.chain, cert.cuts1, cert.cuts2, cert.period_start, pw[0], pw[1])


# -- bounded search -------------------------------------------------------------

@dataclass(frozen=True)
class OrderedBudget:
    max_alphabet: int = 3
    max_chain: int = 8
    max_power: int = 4
    max_word_length: int = 96
    max_factorizations: int = 4000

    @classmethod
    def preset(cls, name: Optional[str] = None) -> "OrderedBudget":
        name = name or os.environ.get("SUBKIT_BUDGET_PRESET", "default")
        if name == "small":
            return cls(2, 4, 2, 48, 1000)
        if name == "large":
            return cls(4, 12, 6, 256, 20000)
        if name == "default":
            return cls()
        raise ValueError("unknown budget preset %r" % name)


def factorizations(t: Substitution, k: int, limit: int,
                   cancel: CancelToken = NEVER) -> Iterator[Tuple[Substitution, Substitution]]:
    """Pairs ``(alpha, beta)`` with ``alpha o beta == t`` over a middle alphabet of size <= k.

    The middle letters are the distinct blocks of a segmentation of the
    images of ``t``, numbered by first appearance, so ``alpha`` is injective.
    """
    images = t.images
    blocks: Dict[Word, int] = {}
    order: List[Word] = []
    beta: List[List[int]] = [[] for _ in images]
    emitted = 0

    def rec(li, pos):
        nonlocal emitted
        if emitted >= limit:
            return
        cancel.check()
        if li == len(images):
            mid = Alphabet.numbered(len(order), "m")
            alpha = Substitution(mid, t.codomain, tuple(order))
            b = Substitution(t.domain, mid, tuple(tuple(x) for x in beta))
            emitted += 1
            yield alpha, b
            return
        word = images[li]
        if pos == len(word):
            yield from rec(li + 1, 0)
            return
        for end in range(pos + 1, len(word) + 1):
            block = word[pos:end]
            idx = blocks.get(block)
            fresh = idx is None
            if fresh:
                if len(order) >= k:
                    continue
                idx = len(order)
                blocks[block] = idx
                order.append(block)
            beta[li].append(idx)
            yield from rec(li, end)
            beta[li].pop()
            if fresh:
                del blocks[block]
                order.pop()
            if emitted >= limit:
                return

    yield from rec(0, 0)


def canonical_form(u: Substitution) -> Tuple[Tuple[Word, ...], Tuple[int, ...]]:
    """Least relabeling of a square substitution and the permutation achieving it."""
    m = len(u.domain)
    best = None
    for perm in itertools.permutations(range(m)):
        imgs = [None] * m
        for b in range(m):
            imgs[perm[b]] = tuple(perm[x] for x in u.images[b])
        key = tuple(imgs)
        if best is None or key < best[0]:
            best = (key, perm)
    return best


def _relabel_middle(alpha: Substitution, beta: Substitution, perm: Sequence[int],
                    middle: Alphabet) -> Tuple[Substitution, Substitution]:
    """Rename middle letter ``b`` to ``perm[b]``."""
    imgs = [None] * len(perm)
    for b, w in enumerate(alpha.images):
        imgs[perm[b]] = w
    a = Substitution(middle, alpha.codomain, tuple(imgs))
    bt = Substitution(beta.domain, middle, tuple(tuple(perm[x] for x in w) for w in beta.images))
    return a, bt


def _cores(s: Substitution, budget: OrderedBudget, cancel: CancelToken):
    """Canonical ``beta o alpha`` cores of factorizations of powers of ``s``."""
    out = {}
    for p in range(1, budget.max_power + 1):
        sp = power(s, p)
        if max(len(w) for w in sp.images) > budget.max_word_length:
            break
        for alpha, beta in factorizations(sp, budget.max_alphabet, budget.max_factorizations, cancel):
            core = compose(beta, alpha)
            key, perm = canonical_form(core)
            middle = Alphabet.numbered(len(alpha.domain), "m")
            out.setdefault(key, (p,) + _relabel_middle(alpha, beta, perm, middle))
    return out


def _search(s1: Substitution, s2: Substitution, budget: OrderedBudget, cancel: CancelToken,
            threads: Optional[int] = None) -> Iterator[OrderedCertificate]:
    if s1.images == s2.images and s1.domain == s2.domain:
        yield OrderedCertificate((s1, s1), (0,), (1,), 0)
    with ThreadPoolExecutor(max_workers=threads or min(2, os.cpu_count() or 1)) as ex:
        c1, c2 = ex.map(lambda s: _cores(s, budget, cancel), (s1, s2))
    # direct period-2 chains: a core of one side is a power of the other
    for (own, other, swap) in ((c1, s2, False), (c2, s1, True)):
        for q in range(1, budget.max_power + 1):
            sq = power(other, q)
            key, perm = canonical_form(sq)
            if key not in own:
                continue
            _, alpha, beta = own[key]
            inv = [0] * len(perm)
            for i, x in enumerate(perm):
                inv[x] = i
            alpha, beta = _relabel_middle(alpha, beta, inv, other.domain)
            if swap:
                yield OrderedCertificate((alpha, beta), (1,), (0,), 0)
            else:
                yield OrderedCertificate((alpha, beta), (0,), (1,), 0)
    # bridge through a common core
    for key in sorted(set(c1) & set(c2)):
        _, a1, b1 = c1[key]
        _, a2, b2 = c2[key]
        yield OrderedCertificate((a1, b2, a2, b1), (0,), (2,), 0)


def _fibonacci_power(s: Substitution) -> Optional[int]:
    from .exact_matrix import ExactMatrix, matrix_power
    m = abelianize(s)
    if m.shape != (2, 2):
        return None
    f = ExactMatrix([[1, 1], [1, 0]])
    cur, k = f, 1
    while cur[0][0] <= m[0][0]:
        if cur == m:
            return k
        cur, k = cur @ f, k + 1
    return None


def analyze_ordered_equivalence(s1: Substitution, s2: Substitution,
                                budget: Optional[OrderedBudget] = None,
                                cancel: CancelToken = NEVER,
                                threads: Optional[int] = None) -> EquivalenceResult:
    budget = budget or OrderedBudget.preset()
    if not s1.is_square or not s2.is_square:
        raise AlphabetError("ordered analysis needs square substitutions")
    name, values = invariant_battery(abelianize(s1).T, abelianize(s2).T)
    if name is not None:
        return EquivalenceResult("distinguished", invariant=name, invariants=values)
    pc1, pc2 = path_counts(s1), path_counts(s2)
    values["path_counts"] = [[pc1.max_count, pc1.min_count], [pc2.max_count, pc2.min_count]]
    if (pc1.max_count, pc1.min_count) != (pc2.max_count, pc2.min_count):
        values["failures"] = ["max/min path counts"]
        return EquivalenceResult("distinguished", invariant="max/min path counts", invariants=values)
    for cert in _search(s1, s2, budget, cancel, threads):
        if len(cert.chain) > budget.max_chain:
            continue
        checked = _with_powers(cert, s1, s2)
        if checked is not None:
            return EquivalenceResult("equivalent", checked, invariants=values, method="factor bridge")
    if _fibonacci_power(s1) and _fibonacci_power(s2):
        from .fibonacci import fib_ordered_equivalence
        res = fib_ordered_equivalence(s1, s2, budget=budget, cancel=cancel)
        if res.verdict == "equivalent":
            checked = _with_powers(res.certificate, s1, s2)
            if checked is not None:
                return EquivalenceResult("equivalent", checked, invariants=values, method="fibonacci")
    return EquivalenceResult("unknown", invariants=values)
