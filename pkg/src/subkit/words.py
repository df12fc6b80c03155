"""Alphabets, words and (rectangular) symbolic substitutions.

Words are stored as tuples of letter indices against an :class:`Alphabet`.
A :class:`Substitution` maps every letter of its *domain* (the new level)
to a nonempty word over its *codomain* (the previous level); it is square
when both alphabets coincide.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .exact_matrix import ExactMatrix

Word = Tuple[int, ...]


class AlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    letters: Tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise AlphabetError("alphabet must be nonempty")
        if len(set(letters)) != len(letters):
            raise AlphabetError("alphabet letters must be distinct: %r" % (letters,))
        for l in letters:
            if not l or any(c.isspace() for c in l):
                raise AlphabetError("bad letter %r" % (l,))

    @classmethod
    def of(cls, letters: Iterable[str] | str) -> "Alphabet":
        if isinstance(letters, str):
            letters = list(letters)
        return cls(tuple(letters))

    @classmethod
    def numbered(cls, n: int, prefix: str = "x") -> "Alphabet":
        if n == 1:
            return cls((prefix,))
        return cls(tuple("%s%d" % (prefix, i) for i in range(n)))

    def __len__(self) -> int:
        return len(self.letters)

    def index(self, letter: str) -> int:
        try:
            return self.letters.index(letter)
        except ValueError:
            raise AlphabetError("unknown letter %r" % (letter,)) from None

    def word(self, text: str | Sequence[str]) -> Word:
        """Parse a word; a plain string is split per character."""
        return tuple(self.index(l) for l in text)

    def render(self, word: Iterable[int]) -> str:
        sep = "" if all(len(l) == 1 for l in self.letters) else " "
        return sep.join(self.letters[i] for i in word)


@dataclass(frozen=True)
class Substitution:
    domain: Alphabet
    codomain: Alphabet
    images: Tuple[Word, ...]

    def __post_init__(self):
        images = tuple(tuple(w) for w in self.images)
        object.__setattr__(self, "images", images)
        if len(images) != len(self.domain):
            raise AlphabetError(
                "need %d images, got %d" % (len(self.domain), len(images)))
        n = len(self.codomain)
        for i, w in enumerate(images):
            if not w:
                raise AlphabetError("image of %r is empty" % self.domain.letters[i])
            if any(not 0 <= x < n for x in w):
                raise AlphabetError("image of %r leaves the codomain" % self.domain.letters[i])

    @classmethod
    def square(cls, rules: Dict[str, str] | Sequence[Tuple[str, str]],
               letters: Sequence[str] | None = None) -> "Substitution":
        """Build a square substitution from ``{"a": "ab", "b": "a"}``."""
        rules = dict(rules)
        alphabet = Alphabet.of(letters if letters is not None else list(rules))
        images = tuple(alphabet.word(rules[l]) for l in alphabet.letters)
        return cls(alphabet, alphabet, images)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Substitution":
        return cls(alphabet, alphabet, tuple((i,) for i in range(len(alphabet))))

    @property
    def is_square(self) -> bool:
        return self.domain == self.codomain

    def __call__(self, word: Iterable[int]) -> Word:
        out: List[int] = []
        for i in word:
            out.extend(self.images[i])
        return tuple(out)

    def image(self, letter: str) -> str:
        return self.codomain.render(self.images[self.domain.index(letter)])

    def lengths(self) -> Tuple[int, ...]:
        return tuple(len(w) for w in self.images)

    def relabel(self, domain: Alphabet | None = None,
                codomain: Alphabet | None = None) -> "Substitution":
        """Same images, renamed alphabets (sizes must agree)."""
        domain = domain or self.domain
        codomain = codomain or self.codomain
        if len(domain) != len(self.domain) or len(codomain) != len(self.codomain):
            raise AlphabetError("relabeling must preserve alphabet sizes")
        return Substitution(domain, codomain, self.images)

    def __str__(self) -> str:
        return ", ".join("%s -> %s" % (l, self.codomain.render(w))
                         for l, w in zip(self.domain.letters, self.images))


def _require_square(s: Substitution) -> None:
    if not s.is_square:
        raise AlphabetError("operation needs a square substitution")


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """``l -> outer(inner(l))``.  Its matrix is ``abelianize(inner) @ abelianize(outer)``."""
    if len(inner.codomain) != len(outer.domain):
        raise AlphabetError("cannot compose: inner codomain has %d letters, outer domain %d"
                            % (len(inner.codomain), len(outer.domain)))
    return Substitution(inner.domain, outer.codomain,
                        tuple(outer(w) for w in inner.images))


def compose_chain(maps: Sequence[Substitution]) -> Substitution:
    """``maps[0] o maps[1] o ... o maps[-1]`` (the last one is applied first)."""
    if not maps:
        raise ValueError("empty chain")
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = compose(m, out)
    return out


def power(s: Substitution, k: int) -> Substitution:
    _require_square(s)
    if k < 0:
        raise ValueError("power must be non-negative")
    result = Substitution.identity(s.domain)
    base = s
    while k:
        if k & 1:
            result = compose(base, result)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def abelianize(s: Substitution) -> ExactMatrix:
    rows = []
    for w in s.images:
        row = [0] * len(s.codomain)
        for x in w:
            row[x] += 1
        rows.append(row)
    return ExactMatrix(rows)


def first_letter_map(s: Substitution) -> Tuple[int, ...]:
    _require_square(s)
    return tuple(w[0] for w in s.images)


def last_letter_map(s: Substitution) -> Tuple[int, ...]:
    _require_square(s)
    return tuple(w[-1] for w in s.images)


def cycle_vertices(f: Sequence[int]) -> Tuple[int, ...]:
    """Points lying on a cycle of the self-map ``i -> f[i]``, sorted."""
    n = len(f)
    x = set(range(n))
    # the eventual image of a self-map of an n-set is reached after n steps
    for _ in range(n):
        x = {f[i] for i in x}
    return tuple(sorted(x))


def cycles(f: Sequence[int]) -> List[Tuple[int, ...]]:
    seen = set()
    out = []
    for v in cycle_vertices(f):
        if v in seen:
            continue
        cyc = [v]
        seen.add(v)
        u = f[v]
        while u != v:
            cyc.append(u)
            seen.add(u)
            u = f[u]
        out.append(tuple(cyc))
    return out


def is_proper(s: Substitution) -> bool:
    def ok(f):
        cs = cycles(f)
        return len(cs) == 1 and len(cs[0]) == 1
    return ok(first_letter_map(s)) and ok(last_letter_map(s))


def factors_of(word: Word, k: int) -> set:
    """All nonempty factors of ``word`` of length at most ``k``."""
    out = set()
    n = len(word)
    for i in range(n):
        for j in range(i + 1, min(n, i + k) + 1):
            out.add(word[i:j])
    return out


@dataclass(frozen=True)
class FactorLanguage:
    substitution: Substitution
    max_length: int
    factors: frozenset

    def __contains__(self, word) -> bool:
        return tuple(word) in self.factors

    def of_length(self, k: int) -> List[Word]:
        return sorted(w for w in self.factors if len(w) == k)

    def rendered(self) -> List[str]:
        a = self.substitution.codomain
        return sorted((a.render(w) for w in self.factors), key=lambda t: (len(t), t))


def factor_language(s: Substitution, k: int) -> FactorLanguage:
    """Admissible words of length <= k, as a least fixpoint.

    A factor of length <= k of some sigma(w) lies inside the images of at most
    k + 1 consecutive letters of w, so it is enough to keep words of length
    <= k + 1 as seeds.
    """
    _require_square(s)
    if k < 1:
        raise ValueError("k must be positive")
    window = k + 1
    known = {(i,) for i in range(len(s.domain))}
    frontier = set(known)
    while frontier:
        new = set()
        for w in frontier:
            for f in factors_of(s(w), window):
                if f not in known:
                    new.add(f)
        known |= new
        frontier = new
    return FactorLanguage(s, k, frozenset(w for w in known if len(w) <= k))
