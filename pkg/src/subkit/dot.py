"""Graphviz DOT export of (ordered) Bratteli diagrams.

Each level is a ``rank = same`` group headed by a plaintext level marker.
Vertices show their label as ``d=<label>``; an incidence count ``k`` gives
``k`` parallel edges.  Ordered diagrams label every edge with its rank and
can paint maximal edges red and minimal edges green.
"""
from __future__ import annotations

from typing import List, Optional, Union

from .bratteli import BratteliDiagram
from .ordered_bratteli import OrderedDiagram

RED, GREEN = "red", "green"


def _node(level: int, v: int) -> str:
    return '"L%d_%d"' % (level, v)


def _quote(s: str) -> str:
    # backslash escapes such as \n are kept for graphviz
    return '"%s"' % s.replace('"', '\\"')


def export_dot(d: Union[BratteliDiagram, OrderedDiagram], depth: Optional[int] = None,
               color_extremes: bool = False, letters: Optional[List[str]] = None,
               name: str = "bratteli") -> str:
    ordered = isinstance(d, OrderedDiagram)
    base = d.base if ordered else d
    depth = base.depth if depth is None else depth
    if not ordered and base.stationary:
        base = base.materialize(depth)
    labels = [base.label(n) for n in range(depth + 1)] if base.stationary or ordered else base.labels[:depth + 1]
    if ordered and letters is None:
        letters = list(d.map(0).codomain.letters)

    out = ["digraph %s {" % name, "\trankdir=TB;", "\tnode [shape=circle];"]
    for n in range(len(labels)):
        out.append("\t{")
        out.append("\t\trank = same;")
        out.append('\t\t"level %d" [shape=plaintext];' % n)
        for v, lab in enumerate(labels[n]):
            text = "d=%d" % lab
            if letters and len(letters) == len(labels[n]):
                text = "%s\\n%s" % (letters[v], text)
            out.append("\t\t%s [label=%s];" % (_node(n, v), _quote(text)))
        out.append("\t}")
    for n in range(len(labels) - 1):
        out.append('\t"level %d" -> "level %d" [style=invis];' % (n, n + 1))
    for n in range(len(labels) - 1):
        if ordered:
            m = d.map(n)
            for v, word in enumerate(m.images):
                for r, src in enumerate(word):
                    attrs = ['label="%d"' % r]
                    if color_extremes:
                        colors = []
                        if r == len(word) - 1:
                            colors.append(RED)
                        if r == 0:
                            colors.append(GREEN)
                        if colors:
                            attrs.append('color="%s"' % ":".join(colors))
                    out.append("\t%s -> %s [%s];" % (_node(n, src), _node(n + 1, v), ", ".join(attrs)))
        else:
            t = base.transition(n)
            for i in range(t.rows):
                for j in range(t.cols):
                    for _ in range(t[i][j]):
                        out.append("\t%s -> %s;" % (_node(n, i), _node(n + 1, j)))
    out.append("}")
    return "\n".join(out) + "\n"
