"""Text and JSON formats: ``.sub``, ``.mat``, diagram and certificate JSON."""
from __future__ import annotations

import json
from typing import Dict, List, Optional, Sequence

from .bratteli import (
    BratteliDiagram, UnorderedCertificate, diagram_from_transitions, stationary_diagram,
)
from .exact_matrix import ExactMatrix, MatrixError
from .ordered_bratteli import OrderedCertificate, OrderedDiagram, ordered_from_maps, ordered_from_substitution
from .words import Alphabet, AlphabetError, Substitution

SCHEMA = 1


class FormatError(ValueError):
    pass


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


# -- .sub ---------------------------------------------------------------------

def parse_sub(text: str) -> Substitution:
    """Parse rules ``a -> ab``; headers ``letters:`` or ``letters_from:``/``letters_to:``."""
    headers: Dict[str, List[str]] = {}
    rules = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if sep and key.strip() in ("letters", "letters_from", "letters_to") and "->" not in line:
            if key.strip() in headers:
                raise FormatError("line %d: duplicate %s header" % (no, key.strip()))
            headers[key.strip()] = rest.split()
            continue
        if "->" not in line:
            raise FormatError("line %d: expected 'letter -> word'" % no)
        lhs, rhs = (x.strip() for x in line.split("->", 1))
        if not lhs or not rhs:
            raise FormatError("line %d: empty side in rule" % no)
        rules.append((no, lhs, rhs))
    if not rules:
        raise FormatError("no rules found")
    if "letters" in headers and ({"letters_from", "letters_to"} & set(headers)):
        raise FormatError("use either letters: or letters_from:/letters_to:")
    if ("letters_from" in headers) != ("letters_to" in headers):
        raise FormatError("letters_from: and letters_to: go together")

    have_header = bool(headers)
    if "letters" in headers:
        dom = cod = headers["letters"]
    elif "letters_from" in headers:
        dom, cod = headers["letters_from"], headers["letters_to"]
    else:
        dom = []
        for _, lhs, _ in rules:
            if lhs in dom:
                continue
            dom.append(lhs)
        cod = dom
    try:
        domain, codomain = Alphabet.of(dom), Alphabet.of(cod)
    except AlphabetError as e:
        raise FormatError(str(e)) from None

    split_words = have_header and (any(len(l) > 1 for l in cod) or any(" " in r for _, _, r in rules))
    images: Dict[str, tuple] = {}
    for no, lhs, rhs in rules:
        if lhs in images:
            raise FormatError("line %d: second rule for %r" % (no, lhs))
        symbols = rhs.split() if split_words else list(rhs.replace(" ", ""))
        try:
            images[lhs] = codomain.word(symbols)
        except AlphabetError as e:
            raise FormatError("line %d: %s" % (no, e)) from None
    missing = [l for l in domain.letters if l not in images]
    if missing:
        raise FormatError("no rule for %s" % ", ".join(missing))
    extra = [l for l in images if l not in domain.letters]
    if extra:
        raise FormatError("rule for unknown letter %s" % ", ".join(extra))
    return Substitution(domain, codomain, tuple(images[l] for l in domain.letters))


def dump_sub(s: Substitution) -> str:
    lines = []
    if s.is_square:
        lines.append("letters: " + " ".join(s.domain.letters))
    else:
        lines.append("letters_from: " + " ".join(s.domain.letters))
        lines.append("letters_to: " + " ".join(s.codomain.letters))
    multi = any(len(l) > 1 for l in s.codomain.letters)
    for l, w in zip(s.domain.letters, s.images):
        sep = " " if multi else ""
        lines.append("%s -> %s" % (l, sep.join(s.codomain.letters[x] for x in w)))
    return "\n".join(lines) + "\n"


# -- .mat ---------------------------------------------------------------------

def parse_mat(text: str) -> ExactMatrix:
    rows = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        try:
            rows.append([int(x) for x in line.split()])
        except ValueError:
            raise FormatError("line %d: not a row of integers" % no) from None
    if not rows:
        raise FormatError("empty matrix")
    try:
        return ExactMatrix(rows)
    except MatrixError as e:
        raise FormatError(str(e)) from None


def dump_mat(m: ExactMatrix) -> str:
    return "\n".join(" ".join(str(x) for x in r) for r in m.tolist()) + "\n"


# -- JSON ---------------------------------------------------------------------

def _mat(rows) -> ExactMatrix:
    try:
        return ExactMatrix(rows)
    except (MatrixError, TypeError) as e:
        raise FormatError("bad matrix %r: %s" % (rows, e)) from None


def diagram_to_json(d: BratteliDiagram) -> dict:
    return {
        "stationary": d.stationary,
        "generator": d.generator.tolist() if d.stationary else None,
        "depth": d.depth,
        "labels": [list(l) for l in d.labels],
        "transitions": [t.tolist() for t in d.transitions],
    }


def diagram_from_json(obj: dict) -> BratteliDiagram:
    try:
        if obj.get("stationary"):
            d = stationary_diagram(_mat(obj["generator"]), int(obj.get("depth", 5)))
        else:
            d = diagram_from_transitions([_mat(t) for t in obj["transitions"]])
    except KeyError as e:
        raise FormatError("missing key %s" % e) from None
    labels = obj.get("labels")
    if labels is not None and [list(l) for l in d.labels] != [list(l) for l in labels]:
        raise FormatError("labels disagree with the transitions")
    return d


def _sub_to_json(s: Substitution) -> dict:
    return {"from": list(s.domain.letters), "to": list(s.codomain.letters),
            "images": [list(w) for w in s.images]}


def _sub_from_json(obj: dict) -> Substitution:
    try:
        return Substitution(Alphabet.of(obj["from"]), Alphabet.of(obj["to"]),
                            tuple(tuple(int(x) for x in w) for w in obj["images"]))
    except (KeyError, TypeError, AlphabetError) as e:
        raise FormatError("bad substitution: %s" % e) from None


def ordered_to_json(d: OrderedDiagram) -> dict:
    out = diagram_to_json(d.base)
    out["orders"] = [[list(w) for w in m.images] for m in d.maps]
    out["letters"] = [list(d.map(0).codomain.letters)] + [list(m.domain.letters) for m in d.maps]
    return out


def ordered_from_json(obj: dict) -> OrderedDiagram:
    try:
        orders = obj["orders"]
        letters = obj.get("letters")
        if letters is None:
            base = 1 + max(x for w in orders[0] for x in w)
            letters = [Alphabet.numbered(base, "v").letters]
            letters += [Alphabet.numbered(len(level), "v").letters for level in orders]
        alph = [Alphabet.of(l) for l in letters]
        maps = [Substitution(alph[n + 1], alph[n], tuple(tuple(w) for w in level))
                for n, level in enumerate(orders)]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError("bad ordered diagram: %s" % e) from None
    if obj.get("stationary"):
        if any(m != maps[0] for m in maps):
            raise FormatError("stationary diagram with differing orders")
        return ordered_from_substitution(maps[0], len(maps))
    return ordered_from_maps(maps)


def certificate_to_json(c) -> dict:
    ordered = isinstance(c, OrderedCertificate)
    return {
        "kind": "ordered" if ordered else "unordered",
        "chain": [_sub_to_json(x) for x in c.chain] if ordered else [x.tolist() for x in c.chain],
        "period_start": c.period_start,
        "cuts1": list(c.cuts1),
        "cuts2": list(c.cuts2),
        "odd_powers": list(c.odd_powers),
        "even_powers": list(c.even_powers),
    }


def certificate_from_json(obj: dict):
    try:
        ordered = obj.get("kind", "unordered") == "ordered"
        chain = tuple(_sub_from_json(x) if ordered else _mat(x) for x in obj["chain"])
        cls = OrderedCertificate if ordered else UnorderedCertificate
        n = len(chain)
        cuts1 = tuple(obj.get("cuts1", range(0, n + 1, 2)))
        cuts2 = tuple(obj.get("cuts2", range(1, n + 1, 2)))
        ps = obj.get("period_start", 0)
        return cls(chain, cuts1, cuts2, ps, tuple(obj.get("odd_powers", ())),
                   tuple(obj.get("even_powers", ())))
    except (KeyError, TypeError) as e:
        raise FormatError("bad certificate: %s" % e) from None


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)
