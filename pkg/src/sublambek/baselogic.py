"""Pluggable base logics for basic categories.

The sequent layer only ever sees the consequence preorder of the bound base
logic, plus (for coordination) partial lattice operations.  Three backends
live here: an explicit finite preorder, propositional and/or logic, and the
identity preorder used by the compile-out.  The feature-logic backend is in
:mod:`sublambek.featurelogic`.

Oracles are immutable after construction; concurrent read-only queries are
safe.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from itertools import product

from .syntax import ParseError

_PROP_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class Verdict(Enum):
    ENTAILED = "Entailed"
    DISENTAILED = "Disentailed"
    BLOCKED = "Blocked"


class BaseLogic(ABC):
    """Behavioral interface every base-logic backend implements.

    ``entails`` must project to a preorder on the Entailed/not-Entailed
    boolean.  ``meet``/``join`` are partial: ``None`` means inconsistent
    (meet) or undefined (join); they are exact lattice bounds whenever
    defined and are only consulted by coordination.
    """

    name = "base"

    @abstractmethod
    def parse(self, text: str):
        """Text of one basic category to a payload."""

    @abstractmethod
    def render(self, payload) -> str:
        """Inverse of parse, up to equivalence of concrete syntax."""

    @abstractmethod
    def entails(self, left, right) -> Verdict:
        ...

    def holds(self, left, right) -> bool:
        """Boolean projection used by the axiom rule."""
        return self.entails(left, right) is Verdict.ENTAILED

    def consistent(self, payload) -> bool:
        return True

    def meet(self, left, right):
        return None

    def join(self, left, right):
        return None


class PosetLogic(BaseLogic):
    """Explicit finite preorder: reflexive-transitive closure of declared
    edges.  Carries no inconsistency information, so non-entailment is
    always Blocked, never Disentailed."""

    name = "poset"

    def __init__(self, atoms, edges=()):
        atom_list = list(dict.fromkeys(atoms))
        known = set(atom_list)
        succ = {a: {a} for a in atom_list}
        for lo, hi in edges:
            if lo not in known or hi not in known:
                missing = lo if lo not in known else hi
                raise ValueError(f"undeclared atom {missing!r} in subtype declaration")
            succ[lo].add(hi)
        # Warshall closure; atom counts are small by construction.
        for mid in atom_list:
            for a in atom_list:
                if mid in succ[a]:
                    succ[a] |= succ[mid]
        self._atoms = tuple(sorted(atom_list))
        self._up = {a: frozenset(s) for a, s in succ.items()}

    @classmethod
    def from_text(cls, text: str) -> "PosetLogic":
        """Declaration format: lines ``atom <name>`` and ``sub <b1> <b2>``."""
        atoms, edges = [], []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "atom" and len(parts) == 2:
                atoms.append(parts[1])
            elif parts[0] == "sub" and len(parts) == 3:
                edges.append((parts[1], parts[2]))
            else:
                raise ParseError(f"bad poset declaration on line {ln}: {raw!r}")
        return cls(atoms, edges)

    @property
    def atoms(self) -> tuple:
        return self._atoms

    def _check(self, atom):
        if atom not in self._up:
            raise ValueError(f"undeclared atom {atom!r}")

    def entails(self, left, right) -> Verdict:
        self._check(left)
        self._check(right)
        return Verdict.ENTAILED if right in self._up[left] else Verdict.BLOCKED

    def le(self, left, right) -> bool:
        self._check(left)
        self._check(right)
        return right in self._up[left]

    def supertypes_of(self, atom) -> tuple:
        self._check(atom)
        return tuple(sorted(self._up[atom]))

    def subtypes_of(self, atom) -> tuple:
        self._check(atom)
        return tuple(sorted(a for a in self._atoms if atom in self._up[a]))

    def parse(self, text: str):
        text = text.strip()
        if text not in self._up:
            raise ParseError(f"undeclared atom {text!r}")
        return text

    def render(self, payload) -> str:
        return payload

    def join(self, left, right):
        """The least upper bound when one exists, else None."""
        self._check(left)
        self._check(right)
        uppers = self._up[left] & self._up[right]
        least = [u for u in uppers if all(v in self._up[u] for v in uppers)]
        return sorted(least)[0] if least else None

    def meet(self, left, right):
        self._check(left)
        self._check(right)
        lowers = [a for a in self._atoms if left in self._up[a] and right in self._up[a]]
        greatest = [m for m in lowers if all(m in self._up[v] for v in lowers)]
        return sorted(greatest)[0] if greatest else None


# ---------------------------------------------------------------------------
# Propositional and/or logic (the Bayer-Johnson base)


@dataclass(frozen=True)
class PAtom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PAnd:
    left: "PropFormula"
    right: "PropFormula"

    def __str__(self):
        return _prop_str(self, 0)


@dataclass(frozen=True)
class POr:
    left: "PropFormula"
    right: "PropFormula"

    def __str__(self):
        return _prop_str(self, 0)


PropFormula = PAtom | PAnd | POr


def _prop_level(f) -> int:
    if isinstance(f, PAtom):
        return 3
    return 2 if isinstance(f, PAnd) else 1


def _prop_str(f, parent_level, right_operand=False) -> str:
    level = _prop_level(f)
    if isinstance(f, PAtom):
        return f.name
    op = "&" if isinstance(f, PAnd) else "|"
    # Left-assoc chains stay flat; parenthesise when binding would change.
    s = (
        _prop_str(f.left, level)
        + op
        + _prop_str(f.right, level, right_operand=True)
    )
    if level < parent_level or (right_operand and level == parent_level):
        return f"({s})"
    return s


def prop_atoms(f) -> frozenset:
    if isinstance(f, PAtom):
        return frozenset((f.name,))
    return prop_atoms(f.left) | prop_atoms(f.right)


def _prop_eval(f, env) -> bool:
    if isinstance(f, PAtom):
        return env[f.name]
    if isinstance(f, PAnd):
        return _prop_eval(f.left, env) and _prop_eval(f.right, env)
    return _prop_eval(f.left, env) or _prop_eval(f.right, env)


class PropLogic(BaseLogic):
    """Negation-free propositional logic decided by exhaustive assignment
    enumeration.  Every formula in the fragment is satisfiable, so the
    entailment verdict is never Disentailed."""

    name = "prop"

    def parse(self, text: str):
        tokens = _prop_tokenize(text)
        f, rest = _prop_parse_or(tokens, 0, text)
        if rest != len(tokens):
            raise ParseError(f"trailing input {tokens[rest][0]!r}", text, tokens[rest][1])
        return f

    def render(self, payload) -> str:
        return str(payload)

    def entails(self, left, right) -> Verdict:
        names = sorted(prop_atoms(left) | prop_atoms(right))
        for bits in product((True, False), repeat=len(names)):
            env = dict(zip(names, bits))
            if _prop_eval(left, env) and not _prop_eval(right, env):
                return Verdict.BLOCKED
        return Verdict.ENTAILED

    def equivalent(self, left, right) -> bool:
        return self.holds(left, right) and self.holds(right, left)

    def meet(self, left, right):
        return PAnd(left, right)

    def join(self, left, right):
        return POr(left, right)


def _prop_tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in "&|()":
            tokens.append((ch, pos))
            pos += 1
            continue
        m = _PROP_IDENT.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", text, pos)
        tokens.append((m.group(), pos))
        pos = m.end()
    return tokens


def _prop_parse_or(tokens, i, text):
    f, i = _prop_parse_and(tokens, i, text)
    while i < len(tokens) and tokens[i][0] == "|":
        g, i = _prop_parse_and(tokens, i + 1, text)
        f = POr(f, g)
    return f, i


def _prop_parse_and(tokens, i, text):
    f, i = _prop_parse_factor(tokens, i, text)
    while i < len(tokens) and tokens[i][0] == "&":
        g, i = _prop_parse_factor(tokens, i + 1, text)
        f = PAnd(f, g)
    return f, i


def _prop_parse_factor(tokens, i, text):
    if i >= len(tokens):
        raise ParseError("unexpected end of formula", text, len(text))
    tok, pos = tokens[i]
    if tok == "(":
        f, i = _prop_parse_or(tokens, i + 1, text)
        if i >= len(tokens) or tokens[i][0] != ")":
            raise ParseError("missing ')'", text, pos)
        return f, i + 1
    if tok in ("&", "|", ")"):
        raise ParseError(f"unexpected token {tok!r}", text, pos)
    return PAtom(tok), i + 1


class IdentityLogic(BaseLogic):
    """Identity preorder over another backend's payloads; the pure Lambek
    target of the compile-out."""

    name = "identity"

    def __init__(self, inner: BaseLogic):
        self.inner = inner

    def parse(self, text: str):
        return self.inner.parse(text)

    def render(self, payload) -> str:
        return self.inner.render(payload)

    def entails(self, left, right) -> Verdict:
        return Verdict.ENTAILED if left == right else Verdict.BLOCKED

    def meet(self, left, right):
        return left if left == right else None

    def join(self, left, right):
        return left if left == right else None
