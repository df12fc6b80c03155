"""Exact integer matrices and the Perron-Frobenius decision procedures.

Everything here is exact: Python integers and :class:`fractions.Fraction`.
A fact used throughout: a monic integer polynomial has only integer
rational roots (rational root theorem), so the Perron-Frobenius eigenvalue
of an integer matrix is rational exactly when it is an integer.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
from typing import List, Optional, Sequence, Tuple

from .cancel import CancelToken, NEVER
from . import poly
from .poly import IntPolynomial


class MatrixError(ValueError):
    """Shape mismatch or a violated matrix precondition."""


class PreconditionError(MatrixError):
    pass


class ExactMatrix:
    """Immutable integer matrix; entries may be any Python int."""

    __slots__ = ("_rows", "_hash")

    def __init__(self, rows: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if not rows or not rows[0]:
            raise MatrixError("matrix must have at least one row and column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise MatrixError("ragged matrix")
        self._rows = rows
        self._hash = None

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "ExactMatrix":
        return cls([[0] * c for _ in range(r)])

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "ExactMatrix":
        """Matrix P with ``P[i][perm[i]] = 1``."""
        n = len(perm)
        return cls([[int(perm[i] == j) for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return len(self._rows[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij):
        if isinstance(ij, tuple):
            i, j = ij
            return self._rows[i][j]
        return self._rows[ij]

    def tolist(self) -> List[List[int]]:
        return [list(r) for r in self._rows]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __repr__(self):
        return "ExactMatrix(%r)" % (self.tolist(),)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in self._rows) + "]"

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return multiply(self, other)

    def __mul__(self, k: int) -> "ExactMatrix":
        return ExactMatrix([[k * x for x in r] for r in self._rows])

    __rmul__ = __mul__

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise MatrixError("shape mismatch in addition")
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self, other)])

    @property
    def T(self) -> "ExactMatrix":
        return transpose(self)

    def row_sums(self) -> Tuple[int, ...]:
        return tuple(sum(r) for r in self._rows)

    def col_sums(self) -> Tuple[int, ...]:
        return tuple(sum(c) for c in zip(*self._rows))

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for r in self._rows for x in r)

    def is_positive(self) -> bool:
        return all(x > 0 for r in self._rows for x in r)

    def apply(self, v: Sequence[int]) -> Tuple[int, ...]:
        if len(v) != self.cols:
            raise MatrixError("vector length %d, matrix has %d columns" % (len(v), self.cols))
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self._rows)

    def validate_transition(self) -> "ExactMatrix":
        """Non-negative with no zero row and no zero column."""
        if not self.is_nonnegative():
            raise MatrixError("negative entry in %s" % self)
        if 0 in self.row_sums() or 0 in self.col_sums():
            raise MatrixError("zero row or column in %s" % self)
        return self

    def validate_substitution(self) -> "ExactMatrix":
        if not self.is_square:
            raise MatrixError("substitution matrix must be square, got %dx%d" % self.shape)
        return self.validate_transition()


def multiply(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    if a.cols != b.rows:
        raise MatrixError("cannot multiply %dx%d by %dx%d" % (a.shape + b.shape))
    bt = list(zip(*b))
    return ExactMatrix([[sum(x * y for x, y in zip(r, c)) for c in bt] for r in a])


def transpose(a: ExactMatrix) -> ExactMatrix:
    return ExactMatrix(list(zip(*a)))


def matrix_power(a: ExactMatrix, k: int) -> ExactMatrix:
    if not a.is_square:
        raise MatrixError("power of a non-square matrix")
    if k < 0:
        raise MatrixError("negative power")
    result = ExactMatrix.identity(a.rows)
    base = a
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def determinant(a: ExactMatrix) -> int:
    """Bareiss fraction-free elimination."""
    if not a.is_square:
        raise MatrixError("determinant of a non-square matrix")
    m = a.tolist()
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(a: ExactMatrix) -> int:
    """Fraction-free row reduction."""
    m = a.tolist()
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows):
            if m[i][c]:
                f, g = m[r][c], m[i][c]
                m[i] = [f * x - g * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def inverse(a: ExactMatrix) -> List[List[Fraction]]:
    """Rational inverse (Gauss-Jordan)."""
    if not a.is_square:
        raise MatrixError("inverse of a non-square matrix")
    n = a.rows
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise MatrixError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [r[n:] for r in m]


def integer_matrix(rows: Sequence[Sequence[Fraction]]) -> Optional[ExactMatrix]:
    """The matrix if every entry is an integer, else ``None``."""
    out = []
    for r in rows:
        row = []
        for x in r:
            x = Fraction(x)
            if x.denominator != 1:
                return None
            row.append(int(x))
        out.append(row)
    return ExactMatrix(out)


# -- primitivity ---------------------------------------------------------

def wielandt_bound(n: int) -> int:
    return n * n - 2 * n + 2


def is_primitive(m: ExactMatrix) -> Tuple[bool, Optional[int]]:
    """``(True, k)`` with the least k such that ``m**k`` is entrywise positive."""
    if not m.is_square:
        raise MatrixError("primitivity needs a square matrix")
    if not m.is_nonnegative():
        raise MatrixError("primitivity needs a non-negative matrix")
    n = m.rows
    pattern = [[x > 0 for x in r] for r in m]
    cur = pattern
    for k in range(1, wielandt_bound(n) + 1):
        if all(all(r) for r in cur):
            return True, k
        cur = [[any(cur[i][l] and pattern[l][j] for l in range(n)) for j in range(n)]
               for i in range(n)]
    return False, None


# -- characteristic polynomial --------------------------------------------

def _faddeev(m: ExactMatrix):
    """Coefficients of det(xI - m) (high first) and the adjugate matrices.

    Returns ``(coeffs, mats)`` where ``adj(xI - m) = sum(mats[k] * x**(n-1-k))``.
    """
    if not m.is_square:
        raise MatrixError("characteristic polynomial of a non-square matrix")
    n = m.rows
    a = m.tolist()
    coeffs = [1]
    mats = []
    prev = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        prod = [[sum(a[i][l] * prev[l][j] for l in range(n)) for j in range(n)]
                for i in range(n)]
        cur = [[prod[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)]
               for i in range(n)]
        mats.append(cur)
        am = [[sum(a[i][l] * cur[l][j] for l in range(n)) for j in range(n)]
              for i in range(n)]
        tr = sum(am[i][i] for i in range(n))
        if tr % k:
            raise ArithmeticError("Faddeev-LeVerrier division not exact")
        coeffs.append(-tr // k)
        prev = cur
    return coeffs, mats


def characteristic_polynomial(m: ExactMatrix) -> IntPolynomial:
    return IntPolynomial.from_high(_faddeev(m)[0])


# -- Perron-Frobenius report -----------------------------------------------

@dataclass(frozen=True)
class PFReport:
    is_primitive: bool
    primitivity_exponent: Optional[int]
    pf_is_rational: bool
    pf_integer_value: Optional[int]
    pf_isolation_interval: Tuple[Fraction, Fraction]
    minimal_polynomial_degree: int
    pf_minimal_polynomial: IntPolynomial
    characteristic_polynomial: IntPolynomial

    def approx(self) -> float:
        lo, hi = self.pf_isolation_interval
        return float((lo + hi) / 2)


def _divisors(n: int) -> List[int]:
    n = abs(n)
    small, large = [], []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def _require_primitive(m: ExactMatrix) -> int:
    if not m.is_square:
        raise PreconditionError("PF eigenvalue needs a square matrix")
    ok, k = is_primitive(m)
    if not ok:
        raise PreconditionError("matrix %s is not primitive" % m)
    return k


def _irreducible_factors(p: IntPolynomial) -> List[IntPolynomial]:
    # polynomial factorization over Z is delegated to sympy
    import sympy
    x = sympy.Symbol("x")
    expr = sum(c * x ** i for i, c in enumerate(p.coefficients))
    _, facs = sympy.factor_list(expr, x)
    out = []
    for f, _mult in facs:
        coeffs = sympy.Poly(f, x).all_coeffs()
        out.append(IntPolynomial.from_high([int(c) for c in coeffs]).primitive())
    return out


def pf_report(m: ExactMatrix, width: Fraction = Fraction(1, 1 << 20),
              cancel: CancelToken = NEVER) -> PFReport:
    """Decide rationality of the PF eigenvalue and isolate it exactly."""
    exponent = _require_primitive(m)
    charpoly = characteristic_polynomial(m)
    rs = m.row_sums()
    lo_bound, hi_bound = min(rs), max(rs)
    stripped, _ = poly.strip_zero_roots(charpoly)
    sqf = poly.squarefree_part(stripped)
    seq = poly.sturm_sequence(sqf)

    value = None
    # integer candidates: divisors of the constant term in [min row sum, max row sum]
    for r in reversed(_divisors(stripped.coefficients[0])):
        cancel.check()
        if r < lo_bound or r > hi_bound:
            continue
        if stripped(r) == 0 and poly.count_roots(seq, r, None) == 0:
            value = r
            break

    if value is not None:
        # exact value: the interval collapses to a point
        interval = (Fraction(value), Fraction(value))
        minpoly = IntPolynomial((-value, 1))
    else:
        interval = poly.largest_root_interval(sqf, Fraction(lo_bound), Fraction(hi_bound + 1),
                                              width=width, cancel=cancel)
        minpoly = None
        for f in _irreducible_factors(stripped):
            if f.degree >= 1 and poly.count_roots(poly.sturm_sequence(f), *interval) == 1:
                minpoly = f
                break
        if minpoly is None:  # pragma: no cover - would mean a broken factorization
            raise ArithmeticError("no irreducible factor vanishes at the PF eigenvalue")
    return PFReport(True, exponent, value is not None, value, interval,
                    minpoly.degree, minpoly, charpoly)


def refine_pf_interval(m: ExactMatrix, width: Fraction,
                       cancel: CancelToken = NEVER) -> Tuple[Fraction, Fraction]:
    rep = pf_report(m, width=width, cancel=cancel)
    if rep.pf_is_rational:
        v = Fraction(rep.pf_integer_value)
        return v, v
    return rep.pf_isolation_interval


def purely_aperiodic(m: ExactMatrix) -> bool:
    return not pf_report(m).pf_is_rational


def non_nilpotent_rank(m: ExactMatrix) -> int:
    if not m.is_square:
        raise MatrixError("non-nilpotent rank needs a square matrix")
    return rank(matrix_power(m, m.rows))


# -- field invariant ---------------------------------------------------------

class Compatibility(enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    INDETERMINATE = "Indeterminate"


def squarefree_kernel(n: int) -> int:
    """Signed square-free part: ``n = kernel * f**2``."""
    if n == 0:
        return 0
    from sympy import factorint
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


def field_compatible(m: ExactMatrix, n: ExactMatrix) -> Compatibility:
    """Compare Q(lambda_m) and Q(lambda_n); decided for degrees 1 and 2 only."""
    rm, rn = pf_report(m), pf_report(n)
    dm, dn = rm.minimal_polynomial_degree, rn.minimal_polynomial_degree
    if dm != dn:
        return Compatibility.INCOMPATIBLE
    if dm == 1:
        return Compatibility.COMPATIBLE
    if dm == 2:
        km = squarefree_kernel(rm.pf_minimal_polynomial.discriminant())
        kn = squarefree_kernel(rn.pf_minimal_polynomial.discriminant())
        return Compatibility.COMPATIBLE if km == kn else Compatibility.INCOMPATIBLE
    return Compatibility.INDETERMINATE


# -- PF eigenvectors ------------------------------------------------------------

@dataclass(frozen=True)
class EigenvectorApprox:
    side: str
    entries: Tuple[Fraction, ...]
    error_bound: Fraction

    def floats(self) -> List[float]:
        return [float(x) for x in self.entries]


def _poly_interval(coeffs_low: Sequence[int], lo: Fraction, hi: Fraction):
    """Range enclosure of an integer polynomial on ``[lo, hi]`` with ``lo >= 0``."""
    pos = [max(c, 0) for c in coeffs_low]
    neg = [max(-c, 0) for c in coeffs_low]

    def ev(cs, x):
        acc = Fraction(0)
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    return ev(pos, lo) - ev(neg, hi), ev(pos, hi) - ev(neg, lo)


def pf_eigenvector(m: ExactMatrix, side: str = "right",
                   tolerance: Fraction = Fraction(1, 10 ** 6),
                   cancel: CancelToken = NEVER) -> EigenvectorApprox:
    """Positive PF eigenvector with a rigorous entrywise error bound.

    ``side="right"`` solves ``m.T v = lambda v`` normalized to sum 1 (letter
    frequencies); ``side="left"`` solves ``m v = lambda v`` normalized so the
    smallest entry is 1 (tile lengths).  The vector is a column of
    ``adj(lambda I - A)``, whose entries are integer polynomials in lambda,
    evaluated on a shrinking rational enclosure of lambda.
    """
    tolerance = Fraction(tolerance)
    if tolerance <= 0:
        raise MatrixError("tolerance must be positive")
    if side not in ("left", "right"):
        raise MatrixError("side must be 'left' or 'right'")
    _require_primitive(m)
    a = m.T if side == "right" else m
    n = a.rows
    _, mats = _faddeev(a)
    # entry (i, 0) of adj(xI - A) as a polynomial in x, low degree first
    col = [[mats[n - 1 - d][i][0] for d in range(n)] for i in range(n)]

    width = Fraction(1, 1 << 10)
    while True:
        cancel.check()
        lo, hi = refine_pf_interval(m, width, cancel)
        enc = [_poly_interval(c, lo, hi) for c in col]
        if all(l > 0 for l, _ in enc):
            if side == "right":
                total_lo = sum(l for l, _ in enc)
                total_hi = sum(h for _, h in enc)
                bounds = [(l / (l + total_hi - h), h / (h + total_lo - l)) for l, h in enc]
            else:
                j = min(range(n), key=lambda i: enc[i][0] + enc[i][1])
                jl, jh = enc[j]
                bounds = [(Fraction(1), Fraction(1)) if i == j else (l / jh, h / jl)
                          for i, (l, h) in enumerate(enc)]
            mids = tuple((l + h) / 2 for l, h in bounds)
            err = max((h - l) / 2 for l, h in bounds)
            if err < tolerance or lo == hi:
                return EigenvectorApprox(side, mids, err)
        width /= 1 << 8
