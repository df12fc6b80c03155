"""Dense univariate polynomials with integer or rational coefficients.

Coefficients are stored lowest degree first.  Only what the spectral
procedures need is here: arithmetic, gcd over Q, square-free part, Sturm
sequences and exact real-root counting.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

from .cancel import CancelToken, NEVER


def _trim(c: Sequence) -> Tuple:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class IntPolynomial:
    coefficients: Tuple[int, ...]

    def __post_init__(self):
        c = _trim(int(x) for x in self.coefficients) if self.coefficients else (0,)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_high(cls, coeffs: Sequence[int]) -> "IntPolynomial":
        return cls(tuple(reversed(list(coeffs))))

    @property
    def degree(self) -> int:
        if self.coefficients == (0,):
            return -1
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coefficients))[1:] or (0,))

    def content(self) -> int:
        g = 0
        for c in self.coefficients:
            g = gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        g = self.content() or 1
        if self.leading < 0:
            g = -g
        return IntPolynomial(tuple(c // g for c in self.coefficients))

    def discriminant(self) -> int:
        if self.degree != 2:
            raise ValueError("discriminant only implemented for quadratics")
        c, b, a = self.coefficients
        return b * b - 4 * a * c

    def __str__(self) -> str:
        terms = []
        for i in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[i]
            if c == 0 and self.degree > 0:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                xp = "x" if i == 1 else "x^%d" % i
                body = xp if mag == 1 else "%d*%s" % (mag, xp)
            sign = "-" if c < 0 else "+"
            if not terms:
                terms.append(("-" if c < 0 else "") + body)
            else:
                terms.append("%s %s" % (sign, body))
        return " ".join(terms)


# -- rational polynomial helpers (tuples of Fractions, low degree first) --

def _q(p) -> Tuple[Fraction, ...]:
    if isinstance(p, IntPolynomial):
        p = p.coefficients
    return _trim(Fraction(x) for x in p)


def _deg(p) -> int:
    return -1 if p == (0,) or p == (Fraction(0),) else len(p) - 1


def q_divmod(a, b):
    a, b = list(_q(a)), _q(b)
    db = _deg(b)
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(a) - db, 1)
    lead = b[-1]
    while _deg(tuple(a)) >= db and _deg(tuple(a)) >= 0:
        shift = len(a) - 1 - db
        f = a[-1] / lead
        quot[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a = list(_trim(a))
    return _trim(quot), _trim(a)


def q_gcd(a, b):
    a, b = _q(a), _q(b)
    while _deg(b) >= 0:
        a, b = b, q_divmod(a, b)[1]
    if _deg(a) < 0:
        return a
    return tuple(c / a[-1] for c in a)


def to_int(p) -> IntPolynomial:
    """Clear denominators of a rational polynomial, return primitive part."""
    p = _q(p)
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    return IntPolynomial(tuple(int(c * den) for c in p)).primitive()


def squarefree_part(p: IntPolynomial) -> IntPolynomial:
    g = q_gcd(p, p.derivative())
    return to_int(q_divmod(p, g)[0])


def strip_zero_roots(p: IntPolynomial) -> Tuple[IntPolynomial, int]:
    c = list(p.coefficients)
    k = 0
    while len(c) > 1 and c[0] == 0:
        c.pop(0)
        k += 1
    return IntPolynomial(tuple(c)), k


def sturm_sequence(p: IntPolynomial) -> List[Tuple[Fraction, ...]]:
    seq = [_q(p), _q(p.derivative())]
    while _deg(seq[-1]) > 0:
        r = q_divmod(seq[-2], seq[-1])[1]
        if _deg(r) < 0:
            break
        seq.append(tuple(-c for c in r))
    return seq


def _eval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_changes(vals) -> int:
    vals = [v for v in vals if v != 0]
    return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))


def _sign_at_infinity(p) -> int:
    return 1 if p[-1] > 0 else -1


def count_roots(seq, lo=None, hi=None) -> int:
    """Distinct real roots in ``(lo, hi]``; ``None`` means -inf / +inf.

    ``seq`` is a Sturm sequence of a square-free polynomial.
    """
    def v(x):
        if x is None:
            return None
        return _sign_changes([_eval(p, Fraction(x)) for p in seq])

    if hi is None:
        v_hi = _sign_changes([_sign_at_infinity(p) for p in seq])
    else:
        v_hi = v(hi)
    if lo is None:
        v_lo = _sign_changes([_sign_at_infinity(p) * (-1) ** _deg(p) for p in seq])
    else:
        v_lo = v(lo)
    return v_lo - v_hi


def largest_root_interval(p: IntPolynomial, lo: Fraction, hi: Fraction,
                          width: Fraction = Fraction(1, 1 << 20),
                          cancel: CancelToken = NEVER) -> Tuple[Fraction, Fraction]:
    """Rational ``(a, b)`` with ``a < r < b`` for the largest real root ``r``.

    ``p`` must be square-free with its largest real root in ``(lo, hi)``; the
    returned interval contains no other root of ``p``.
    """
    seq = sturm_sequence(p)
    a, b = Fraction(lo), Fraction(hi)
    if count_roots(seq, b, None) != 0 or count_roots(seq, a, b) < 1:
        raise ValueError("largest root not inside (%s, %s)" % (lo, hi))
    while True:
        cancel.check()
        inside = count_roots(seq, a, b)
        if inside == 1 and b - a <= width and p(a) != 0 and p(b) != 0:
            return a, b
        mid = (a + b) / 2
        if count_roots(seq, mid, b) >= 1:
            # root in (mid, b]; b is never a root because roots above b are excluded
            # and b starts strictly above the largest root
            a = mid
        else:
            b = mid
        if p(b) == 0:
            # the largest root sits exactly on b; widen upwards a little
            b = b + (b - a) / 2
