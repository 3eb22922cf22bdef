"""Formulae, G-terms, sequents, and the purely structural operations on them.

Basic categories carry an opaque payload owned by whichever base logic the
grammar is bound to.  This module compares payloads syntactically; semantic
comparisons go through the base-logic oracle.  All values are immutable and
hashable after construction, so they can be shared freely between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator

# Occurrence path steps.  RES/ARG descend into a formula, LEFT/RIGHT into a
# G-term.  A path is a tuple of steps, root-first.
RES = "res"
ARG = "arg"
LEFT = "left"
RIGHT = "right"

Path = "tuple[str, ...]"


class Regime(Enum):
    """Which structural rules are folded into G-term identity."""

    NL = "NL"
    L = "L"
    LP = "LP"
    NLP = "NLP"

    @property
    def associative(self) -> bool:
        return self in (Regime.L, Regime.LP)

    @property
    def commutative(self) -> bool:
        return self in (Regime.LP, Regime.NLP)


@dataclass(frozen=True)
class Basic:
    """A basic category: an opaque base-logic formula."""

    payload: Any

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("b", self.payload)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class Over:
    """A/B: takes a B on its right, yields an A."""

    result: "Formula"
    arg: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("/", self.result, self.arg)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class Under:
    """B\\A: takes a B on its left, yields an A."""

    arg: "Formula"
    result: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("\\", self.arg, self.result)))

    def __hash__(self):
        return self._hash


Formula = Basic | Over | Under


@dataclass(frozen=True)
class Leaf:
    formula: Formula

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("leaf", self.formula)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class Node:
    left: "GTerm"
    right: "GTerm"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("node", self.left, self.right)))

    def __hash__(self):
        return self._hash


GTerm = Leaf | Node

# The shape canonicalize() maps a G-term to: the G-term itself for NL/NLP,
# a tuple of formulae for L (sequence) and LP (sorted multiset).
CanonicalGTerm = "GTerm | tuple[Formula, ...]"


@dataclass(frozen=True)
class Sequent:
    antecedent: GTerm
    succedent: Formula

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.antecedent, self.succedent)))

    def __hash__(self):
        return self._hash


# ---------------------------------------------------------------------------
# Formula operations


def connectives(f: Formula) -> int:
    if isinstance(f, Basic):
        return 0
    return 1 + connectives(f.result) + connectives(f.arg)


def polarity_of(root: Formula, occ: "Path") -> int:
    """Sign (+1/-1) of the subformula occurrence at ``occ`` in ``root``.

    Descending into the result of a slash keeps the sign, descending into
    the argument flips it.
    """
    sign = 1
    cur = root
    for step in occ:
        if isinstance(cur, Basic):
            raise ValueError(f"path step {step!r} descends into a basic type")
        if step == RES:
            cur = cur.result
        elif step == ARG:
            cur = cur.arg
            sign = -sign
        else:
            raise ValueError(f"invalid formula path step {step!r}")
    return sign


def formula_at(root: Formula, occ: "Path") -> Formula:
    cur = root
    for step in occ:
        if isinstance(cur, Basic):
            raise ValueError(f"path step {step!r} descends into a basic type")
        if step == RES:
            cur = cur.result
        elif step == ARG:
            cur = cur.arg
        else:
            raise ValueError(f"invalid formula path step {step!r}")
    return cur


def basic_occurrences(root: Formula) -> "list[tuple[Path, int, Basic]]":
    """All basic-type occurrences as (path, polarity, basic), preorder."""
    out = []

    def walk(f, path, sign):
        if isinstance(f, Basic):
            out.append((path, sign, f))
        else:
            walk(f.result, path + (RES,), sign)
            walk(f.arg, path + (ARG,), -sign)

    walk(root, (), 1)
    return out


def replace_formula_at(root: Formula, occ: "Path", new: Formula) -> Formula:
    if not occ:
        return new
    step, rest = occ[0], occ[1:]
    if isinstance(root, Basic):
        raise ValueError(f"path step {step!r} descends into a basic type")
    if step == RES:
        res = replace_formula_at(root.result, rest, new)
        return Over(res, root.arg) if isinstance(root, Over) else Under(root.arg, res)
    if step == ARG:
        arg = replace_formula_at(root.arg, rest, new)
        return Over(root.result, arg) if isinstance(root, Over) else Under(arg, root.result)
    raise ValueError(f"invalid formula path step {step!r}")


def subformula_closure(formulas) -> "frozenset[Formula]":
    """Smallest superset closed under taking result and argument children."""
    seen = set()
    todo = list(formulas)
    while todo:
        f = todo.pop()
        if f in seen:
            continue
        seen.add(f)
        if not isinstance(f, Basic):
            todo.append(f.result)
            todo.append(f.arg)
    return frozenset(seen)


def subtype(a: Formula, b: Formula, base) -> bool:
    """Lifted subtype check: covariant results, contravariant arguments.

    Basic and complex types are never comparable, nor are the two slash
    directions with each other.
    """
    if isinstance(a, Basic):
        return isinstance(b, Basic) and base.holds(a.payload, b.payload)
    if isinstance(a, Over):
        if not isinstance(b, Over):
            return False
    elif not isinstance(b, Under) or not isinstance(a, Under):
        return False
    return subtype(a.result, b.result, base) and subtype(b.arg, a.arg, base)


# ---------------------------------------------------------------------------
# G-term operations


def leaves(u: GTerm) -> "list[Formula]":
    out = []
    stack = [u]
    while stack:
        t = stack.pop()
        if isinstance(t, Leaf):
            out.append(t.formula)
        else:
            stack.append(t.right)
            stack.append(t.left)
    return out


def gterm_of(formulas) -> GTerm:
    """Left-branching G-term over a nonempty sequence of formulae."""
    items = [Leaf(f) for f in formulas]
    return fold_gterms(items)


def fold_gterms(items) -> GTerm:
    """Left-branching combination of a nonempty sequence of G-terms."""
    if not items:
        raise ValueError("G-terms are nonempty")
    acc = items[0]
    for t in items[1:]:
        acc = Node(acc, t)
    return acc


def fold_item_path(n: int, idx: int) -> "Path":
    """Path of item ``idx`` inside ``fold_gterms`` of ``n`` items."""
    if n == 1:
        return ()
    if idx == 0:
        return (LEFT,) * (n - 1)
    return (LEFT,) * (n - 1 - idx) + (RIGHT,)


def subgterm_at(u: GTerm, path: "Path") -> GTerm:
    cur = u
    for step in path:
        if isinstance(cur, Leaf):
            raise ValueError(f"path step {step!r} descends into a leaf")
        cur = cur.left if step == LEFT else cur.right
    return cur


def replace_subgterm(u: GTerm, path: "Path", new: GTerm) -> GTerm:
    if not path:
        return new
    if isinstance(u, Leaf):
        raise ValueError(f"path step {path[0]!r} descends into a leaf")
    if path[0] == LEFT:
        return Node(replace_subgterm(u.left, path[1:], new), u.right)
    return Node(u.left, replace_subgterm(u.right, path[1:], new))


def gterm_nodes(u: GTerm) -> "Iterator[tuple[Path, Node]]":
    """Internal nodes with their paths, preorder."""
    stack = [((), u)]
    while stack:
        path, t = stack.pop()
        if isinstance(t, Node):
            yield path, t
            stack.append((path + (RIGHT,), t.right))
            stack.append((path + (LEFT,), t.left))


def gterm_paths(u: GTerm) -> "Iterator[Path]":
    """Paths of every sub-G-term (leaves and nodes), preorder."""
    stack = [((), u)]
    while stack:
        path, t = stack.pop()
        yield path
        if isinstance(t, Node):
            stack.append((path + (RIGHT,), t.right))
            stack.append((path + (LEFT,), t.left))


_KEY_CACHE: "dict[Formula, str]" = {}


def formula_key(f: Formula) -> str:
    """Deterministic total order key; injective on distinct formulae."""
    k = _KEY_CACHE.get(f)
    if k is None:
        k = _KEY_CACHE[f] = render_formula(f)
    return k


def canonicalize(u: GTerm, regime: Regime):
    """Representative of ``u`` modulo the regime's structural rules.

    NL: the G-term itself.  L: the flattened sequence of formulae.  LP: the
    multiset of formulae as a sorted tuple.  NLP: the tree with each node's
    children in a fixed total order.
    """
    if regime is Regime.NL:
        return u
    if regime is Regime.L:
        return tuple(leaves(u))
    if regime is Regime.LP:
        return tuple(sorted(leaves(u), key=formula_key))
    return _nlp_canon(u)


def _nlp_canon(u: GTerm) -> GTerm:
    if isinstance(u, Leaf):
        return u
    left = _nlp_canon(u.left)
    right = _nlp_canon(u.right)
    if render_gterm(left) <= render_gterm(right):
        return Node(left, right)
    return Node(right, left)


def sequent_key(s: Sequent, regime: Regime):
    return (canonicalize(s.antecedent, regime), s.succedent)


def sequents_equal(a: Sequent, b: Sequent, regime: Regime) -> bool:
    return a.succedent == b.succedent and canonicalize(a.antecedent, regime) == canonicalize(
        b.antecedent, regime
    )


# ---------------------------------------------------------------------------
# Rendering

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def render_payload(payload) -> str:
    """Basic-type rendering: bare identifiers stay bare, anything else is
    bracketed so it round-trips through the concrete syntax."""
    hook = getattr(payload, "render_as_basic", None)
    if hook is not None:
        return hook()
    s = str(payload)
    if _IDENT_RE.match(s):
        return s
    return f"[{s}]"


def render_formula(f: Formula) -> str:
    # `\` binds tighter than `/`; `/` associates left, `\` right.
    if isinstance(f, Basic):
        return render_payload(f.payload)
    if isinstance(f, Over):
        left = render_formula(f.result)
        right = render_formula(f.arg)
        if isinstance(f.arg, Over):
            right = f"({right})"
        return f"{left}/{right}"
    left = render_formula(f.arg)
    if not isinstance(f.arg, Basic):
        left = f"({left})"
    right = render_formula(f.result)
    if isinstance(f.result, Over):
        right = f"({right})"
    return f"{left}\\{right}"


def render_gterm(u: GTerm) -> str:
    # Left-assoc chains render flat; right nesting gets parentheses, so the
    # output re-parses to the same tree.
    items = []
    cur = u
    while isinstance(cur, Node):
        items.append(cur.right)
        cur = cur.left
    items.append(cur)
    items.reverse()
    parts = []
    for t in items:
        if isinstance(t, Leaf):
            parts.append(render_formula(t.formula))
        else:
            parts.append(f"({render_gterm(t)})")
    return " , ".join(parts)


def render_sequent(s: Sequent) -> str:
    return f"{render_gterm(s.antecedent)} => {render_formula(s.succedent)}"


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    """Raised on malformed type, sequent, or grammar text."""

    def __init__(self, message: str, text: str = "", pos: int = -1):
        self.text = text
        self.pos = pos
        if pos >= 0:
            message = f"{message} (column {pos + 1})"
        super().__init__(message)


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<arrow>=>)
      | (?P<bracket>\[[^\[\]]*\])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<op>[/\\(),^])
    """,
    re.X,
)


def tokenize_type(text: str) -> "list[tuple[str, str, int]]":
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "bracket":
                tok = tok[1:-1]
            elif kind == "op":
                kind = tok
            tokens.append((kind, tok, pos))
        pos = m.end()
    return tokens


class _Tokens:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, "", len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", self.text, tok[2])
        return tok

    def error(self, msg):
        raise ParseError(msg, self.text, self.peek()[2])


def _parse_formula(ts: _Tokens, base, annotations):
    """formula := under ('/' under)*  (left-assoc)."""
    f, anns = _parse_under(ts, base, annotations)
    while ts.peek()[0] == "/":
        ts.next()
        arg, argann = _parse_under(ts, base, annotations)
        anns = [((RES,) + p, v) for p, v in anns] + [((ARG,) + p, v) for p, v in argann]
        f = Over(f, arg)
    return f, anns


def _parse_under(ts: _Tokens, base, annotations):
    """under := atom ('\\' under)?  (right-assoc)."""
    f, anns = _parse_atom(ts, base, annotations)
    if ts.peek()[0] == "\\":
        ts.next()
        res, resann = _parse_under(ts, base, annotations)
        anns = [((ARG,) + p, v) for p, v in anns] + [((RES,) + p, v) for p, v in resann]
        return Under(f, res), anns
    return f, anns


def _parse_atom(ts: _Tokens, base, annotations):
    kind, tok, pos = ts.next()
    if kind == "(":
        f, anns = _parse_formula(ts, base, annotations)
        ts.expect(")")
        return f, anns
    if kind in ("ident", "bracket"):
        try:
            payload = base.parse(tok)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), ts.text, pos) from exc
        var = None
        if ts.peek()[0] == "^":
            if annotations is None:
                ts.error("layer annotations are not allowed here")
            ts.next()
            vkind, vtok, vpos = ts.next()
            if vkind != "ident" or not vtok[0].isupper():
                raise ParseError("layer variable expected after '^'", ts.text, vpos)
            var = vtok
        anns = [((), var)] if var is not None else []
        return Basic(payload), anns
    raise ParseError(f"unexpected token {tok!r}", ts.text, pos)


def parse_formula(text: str, base) -> Formula:
    ts = _Tokens(tokenize_type(text), text)
    f, _ = _parse_formula(ts, base, None)
    if ts.peek()[0] is not None:
        ts.error(f"trailing input {ts.peek()[1]!r}")
    return f


def parse_annotated_formula(text: str, base):
    """Parse a formula whose basic types may carry ``^Var`` layer markers.

    Returns (formula, ((path, var), ...)) with paths of annotated basics.
    """
    ts = _Tokens(tokenize_type(text), text)
    f, anns = _parse_formula(ts, base, True)
    if ts.peek()[0] is not None:
        ts.error(f"trailing input {ts.peek()[1]!r}")
    return f, tuple(sorted(anns))


def _parse_gterm_elements(ts: _Tokens, base) -> GTerm:
    items = [_parse_gterm_element(ts, base)]
    while ts.peek()[0] == ",":
        ts.next()
        items.append(_parse_gterm_element(ts, base))
    return fold_gterms(items)


def _parse_gterm_element(ts: _Tokens, base) -> GTerm:
    if ts.peek()[0] == "(" and _group_has_comma(ts):
        ts.next()
        inner = _parse_gterm_elements(ts, base)
        ts.expect(")")
        return inner
    f, _ = _parse_formula(ts, base, None)
    return Leaf(f)


def _group_has_comma(ts: _Tokens) -> bool:
    # Lookahead: does the parenthesised group starting at the current '('
    # contain a comma at its own nesting depth?
    depth = 0
    for kind, _tok, _pos in ts.tokens[ts.i:]:
        if kind == "(":
            depth += 1
        elif kind == ")":
            depth -= 1
            if depth == 0:
                return False
        elif kind == "," and depth == 1:
            return True
    raise ParseError("unbalanced parentheses", ts.text, ts.peek()[2])


def parse_gterm(text: str, base) -> GTerm:
    ts = _Tokens(tokenize_type(text), text)
    u = _parse_gterm_elements(ts, base)
    if ts.peek()[0] is not None:
        ts.error(f"trailing input {ts.peek()[1]!r}")
    return u


def parse_sequent(text: str, base) -> Sequent:
    """``U => A`` where U is a comma-separated, optionally bracketed G-term.

    A flat comma list builds a left-branching G-term; the regimes with
    structural rules do not distinguish the bracketings anyway.
    """
    ts = _Tokens(tokenize_type(text), text)
    u = _parse_gterm_elements(ts, base)
    ts.expect("arrow")
    f, _ = _parse_formula(ts, base, None)
    if ts.peek()[0] is not None:
        ts.error(f"trailing input {ts.peek()[1]!r}")
    return Sequent(u, f)
