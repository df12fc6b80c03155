"""Powers of the Fibonacci matrix: P/Q factorization and ordered equivalence.

``P = [[1,0],[1,1]]`` and ``Q = [[1,1],[0,1]]`` generate the monoid of
non-negative 2x2 integer matrices of determinant 1 freely, so the peel in
:func:`pq_factorize` is unique.  With ``J`` the swap, ``F = QJ = JP``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple

from .bratteli import EquivalenceResult
from .cancel import CancelToken, NEVER
from .exact_matrix import ExactMatrix, determinant, matrix_power
from .words import Alphabet, AlphabetError, Substitution, abelianize, compose, power

P = ExactMatrix([[1, 0], [1, 1]])
Q = ExactMatrix([[1, 1], [0, 1]])
J = ExactMatrix([[0, 1], [1, 0]])
F = ExactMatrix([[1, 1], [1, 0]])
I2 = ExactMatrix.identity(2)

AB = Alphabet.of("ab")


@dataclass(frozen=True)
class PQWord:
    letters: str
    left_j: bool = False
    right_j: bool = False

    def __post_init__(self):
        if set(self.letters) - {"P", "Q"}:
            raise ValueError("P/Q words use only the letters P and Q")

    def __str__(self):
        return ("J" if self.left_j else "") + self.letters + ("J" if self.right_j else "")

    @classmethod
    def parse(cls, text: str) -> "PQWord":
        text = text.strip()
        left = text.startswith("J")
        body = text[1:] if left else text
        right = body.endswith("J")
        body = body[:-1] if right else body
        return cls(body, left, right)

    def evaluate(self) -> ExactMatrix:
        out = J if self.left_j else I2
        for c in self.letters:
            out = out @ (P if c == "P" else Q)
        return out @ J if self.right_j else out


def _peel(m: ExactMatrix) -> Optional[str]:
    (a, b), (c, d) = m.tolist()
    out = []
    while (a, b, c, d) != (1, 0, 0, 1):
        if min(a, b, c, d) < 0:
            return None
        if a >= c and b >= d and (a, b) != (c, d):
            out.append("Q")
            a, b = a - c, b - d
        elif c >= a and d >= b and (a, b) != (c, d):
            out.append("P")
            c, d = c - a, d - b
        else:
            return None
    return "".join(out)


def pq_factorize(m: ExactMatrix) -> Optional[PQWord]:
    if m.shape != (2, 2):
        raise ValueError("P/Q factorization needs a 2x2 matrix")
    if not m.is_nonnegative():
        return None
    det = determinant(m)
    if det == 1:
        w = _peel(m)
        return None if w is None else PQWord(w)
    if det == -1:
        w = _peel(m @ J)
        if w is not None:
            return PQWord(w, right_j=True)
        w = _peel(J @ m)
        if w is not None:
            return PQWord(w, left_j=True)
    return None


@dataclass(frozen=True)
class FibFactorClass:
    kind: str  # "PlainSplit" | "TwistedSplit"
    k: int
    l: int

    @property
    def m(self) -> int:
        return self.k + self.l

    def matrices(self) -> Tuple[ExactMatrix, ExactMatrix]:
        a, b = matrix_power(F, self.k), matrix_power(F, self.l)
        if self.kind == "TwistedSplit":
            return a @ J, J @ b
        return a, b

    def __str__(self):
        return "%s(%d,%d)" % (self.kind, self.k, self.l)


def fibonacci_exponent(m: ExactMatrix) -> Optional[int]:
    """``k >= 0`` with ``m == F^k``; entries bound the search."""
    if m.shape != (2, 2):
        return None
    cur, k = I2, 0
    while cur[0][0] <= max(m[0][0], 1):
        if cur == m:
            return k
        cur, k = cur @ F, k + 1
    return None


def classify_fib_factors(a: ExactMatrix, b: ExactMatrix) -> Optional[FibFactorClass]:
    m = fibonacci_exponent(a @ b)
    if m is None or m < 1:
        return None
    for k in range(m + 1):
        fk = matrix_power(F, k)
        if a == fk and b == matrix_power(F, m - k):
            return FibFactorClass("PlainSplit", k, m - k)
        if a == fk @ J and b == J @ matrix_power(F, m - k):
            return FibFactorClass("TwistedSplit", k, m - k)
    return None


# -- ordered substitutions with matrix F^l ------------------------------------------

def _count_words(na: int, nb: int) -> int:
    return comb(na + nb, na)


def _unrank_word(na: int, nb: int, r: int) -> Tuple[int, ...]:
    """The ``r``-th word (lexicographic, a < b) with ``na`` a's and ``nb`` b's."""
    out = []
    while na + nb:
        if na:
            c = _count_words(na - 1, nb)
            if r < c:
                out.append(0)
                na -= 1
                continue
            r -= c
        out.append(1)
        nb -= 1
    return tuple(out)


class FibSubstitutions(Sequence):
    """All ordered substitutions on ``{a, b}`` with matrix ``F^l``, indexed lazily."""

    def __init__(self, l: int):
        self.l = l
        (self._a0, self._b0), (self._a1, self._b1) = matrix_power(F, l).tolist()
        self._n0 = _count_words(self._a0, self._b0)
        self._n1 = _count_words(self._a1, self._b1)

    def __len__(self):
        return self._n0 * self._n1

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        r0, r1 = divmod(i, self._n1)
        return Substitution(AB, AB, (_unrank_word(self._a0, self._b0, r0),
                                     _unrank_word(self._a1, self._b1, r1)))

    def __repr__(self):
        return "FibSubstitutions(l=%d, count=%d)" % (self.l, len(self))


_fib_lock = threading.Lock()


@lru_cache(maxsize=None)
def _fib_cached(l: int) -> FibSubstitutions:
    return FibSubstitutions(l)


def enumerate_ordered_fib(l: int) -> FibSubstitutions:
    if not 0 <= l <= 6:
        raise ValueError("l must lie in 0..6")
    with _fib_lock:
        return _fib_cached(l)


# -- the specialized ordered search --------------------------------------------------

def _parses(word, blocks, limit) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = []
    acc: List[int] = []

    def rec(pos):
        if len(out) >= limit:
            return
        if pos == len(word):
            out.append(tuple(acc))
            return
        for x, blk in enumerate(blocks):
            if word[pos:pos + len(blk)] == blk:
                acc.append(x)
                rec(pos + len(blk))
                acc.pop()

    rec(0)
    return out


def _right_factors(t: Substitution, outer: Substitution, limit: int = 64) -> Iterator[Substitution]:
    """All ``inner`` with ``compose(outer, inner) == t``."""
    per = [_parses(w, outer.images, limit) for w in t.images]
    if any(not p for p in per):
        return
    count = 0
    for choice in _product(per):
        yield Substitution(t.domain, outer.domain, choice)
        count += 1
        if count >= limit:
            return


def _product(lists):
    if not lists:
        yield ()
        return
    for x in lists[0]:
        for rest in _product(lists[1:]):
            yield (x,) + rest


def _power_of(u: Substitution, s: Substitution, limit: int) -> Optional[int]:
    cur = s
    target = max(len(w) for w in u.images)
    for q in range(1, limit + 1):
        if cur.images == u.images:
            return q
        if max(len(w) for w in cur.images) > target:
            return None
        cur = compose(cur, s)
    return None


def fib_ordered_equivalence(s1: Substitution, s2: Substitution, budget=None,
                            cancel: CancelToken = NEVER,
                            max_candidates: int = 200000) -> EquivalenceResult:
    """Search period-2 chains ``[c0, c1]`` of Fibonacci-power substitutions.

    ``c0 o c1`` must be a power of ``s1`` and ``c1 o c0`` a power of ``s2``
    (or the roles swapped).  The outer map ``c0`` is drawn from
    :func:`enumerate_ordered_fib`, exponents that are multiples of the other
    side's exponent first; ``c1`` is recovered by parsing.
    """
    from .ordered_bratteli import OrderedCertificate, ordered_certificate_powers, path_counts

    max_power = getattr(budget, "max_power", 4)
    m, n = fibonacci_exponent(abelianize(s1)), fibonacci_exponent(abelianize(s2))
    if not m or not n:
        raise AlphabetError("both substitutions need matrix F^m with m >= 1")
    pc1, pc2 = path_counts(s1), path_counts(s2)
    if (pc1.max_count, pc1.min_count) != (pc2.max_count, pc2.min_count):
        return EquivalenceResult("distinguished", invariant="max/min path counts")

    def checked(cert):
        pw = ordered_certificate_powers(cert, s1, s2)
        if pw is None:
            return None
        return OrderedCertificate(cert.chain, cert.cuts1, cert.cuts2, cert.period_start, pw[0], pw[1])

    if s1.images == s2.images:
        c = checked(OrderedCertificate((s1, s1), (0,), (1,), 0))
        if c is not None:
            return EquivalenceResult("equivalent", c, method="identical")

    seen = 0
    for first, other, e_first, e_other, swap in ((s1, s2, m, n, False), (s2, s1, n, m, True)):
        for p in range(1, max_power + 1):
            target = power(first, p)
            ls = [l for l in range(1, min(6, e_first * p - 1) + 1)]
            ls.sort(key=lambda l: (l % e_other != 0, l))
            for l0 in ls:
                for c0 in enumerate_ordered_fib(l0):
                    cancel.check()
                    seen += 1
                    if seen > max_candidates:
                        return EquivalenceResult("unknown")
                    for c1 in _right_factors(target, c0):
                        back = compose(c1, c0)
                        if _power_of(back, other, max_power) is None:
                            continue
                        c0r = Substitution(c0.domain, first.codomain, c0.images)
                        c1r = Substitution(other.domain, c0.domain, c1.images)
                        cuts = ((1,), (0,)) if swap else ((0,), (1,))
                        cert = checked(OrderedCertificate((c0r, c1r), cuts[0], cuts[1], 0))
                        if cert is not None:
                            return EquivalenceResult("equivalent", cert, method="fibonacci chain")
    return EquivalenceResult("unknown")
