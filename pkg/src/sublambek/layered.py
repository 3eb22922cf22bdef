"""Double layering: basic-type occurrences carry layer variables, lexical
entries attach feature constraints, and proof search threads a global
constraint that grows at every axiom.

Environments are branch-local persistent values: each axiom produces a new
environment by conjoining one variable equation, so backtracking never
leaks bindings between branches and the solution set is independent of the
rule-application order.  Fresh instance names come from one process-wide
counter (atomic in CPython), so concurrent instantiations stay disjoint.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from .baselogic import Verdict
from .featurelogic import FAtom, FVar, TOP, free_vars, rename_var, solve_equations
from .prover import Proof, RuleName, SearchConfig, axiom_payloads, rule_applications
from .syntax import (
    ARG,
    RES,
    Basic,
    Formula,
    GTerm,
    Leaf,
    Node,
    Over,
    Sequent,
    Under,
    basic_occurrences,
)


@dataclass(frozen=True)
class LayeredBasic:
    """Payload pairing a base-logic formula with its layer variable."""

    term: object
    var: str

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.term, self.var)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"{self.term}^{self.var}"

    def render_as_basic(self) -> str:
        inner = str(self.term)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", inner):
            return f"{inner}^{self.var}"
        return f"[{inner}]^{self.var}"


@dataclass(frozen=True)
class AnnotatedFormula:
    """A formula skeleton plus a map from basic-occurrence paths to layer
    variables.  Annotations may be partial until instantiation."""

    skeleton: Formula
    annotations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.skeleton, self.annotations)))

    def __hash__(self):
        return self._hash

    @property
    def mapping(self) -> dict:
        return dict(self.annotations)


@dataclass(frozen=True)
class ConstrainedEntry:
    """An annotated lexical type with feature constraints on its layer
    variables, given as (variable, term) equations."""

    typed: AnnotatedFormula
    constraints: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.typed, self.constraints)))

    def __hash__(self):
        return self._hash


_INSTANCES = itertools.count()


def plain_entry(formula: Formula) -> ConstrainedEntry:
    return ConstrainedEntry(AnnotatedFormula(formula, ()), ())


def instantiate(entry: ConstrainedEntry) -> ConstrainedEntry:
    """Rename all layer variables fresh, preserving sharing within the
    entry, and annotate any bare basic occurrences."""
    n = next(_INSTANCES)
    anns = entry.typed.mapping
    mapping = {}
    renamed = []
    anon = 0
    for path, _sign, _basic in basic_occurrences(entry.typed.skeleton):
        var = anns.get(path)
        if var is None:
            var = f"_u{anon}"
            anon += 1
        fresh = mapping.get(var)
        if fresh is None:
            fresh = f"{var}.{n}"
            mapping[var] = fresh
        renamed.append((path, fresh))
    constraints = []
    for var, term in entry.constraints:
        for v in sorted({var} | free_vars(term)):
            if v not in mapping:
                mapping[v] = f"{v}.{n}"
        for old, new in mapping.items():
            term = rename_var(term, old, new)
        constraints.append((mapping[var], term))
    return ConstrainedEntry(
        AnnotatedFormula(entry.typed.skeleton, tuple(sorted(renamed))),
        tuple(constraints),
    )


def embed(entry: ConstrainedEntry) -> Formula:
    """Formula whose basic payloads carry the entry's layer variables.
    Requires a fully annotated (instantiated) entry."""
    anns = entry.typed.mapping

    def walk(f, path):
        if isinstance(f, Basic):
            var = anns.get(path)
            if var is None:
                raise ValueError("basic occurrence without a layer variable; instantiate first")
            return Basic(LayeredBasic(f.payload, var))
        if isinstance(f, Over):
            return Over(walk(f.result, path + (RES,)), walk(f.arg, path + (ARG,)))
        return Under(walk(f.arg, path + (ARG,)), walk(f.result, path + (RES,)))

    return walk(entry.typed.skeleton, ())


def erase_formula(f: Formula) -> Formula:
    if isinstance(f, Basic):
        payload = f.payload
        return Basic(payload.term) if isinstance(payload, LayeredBasic) else f
    if isinstance(f, Over):
        return Over(erase_formula(f.result), erase_formula(f.arg))
    return Under(erase_formula(f.arg), erase_formula(f.result))


def erase_gterm(u: GTerm) -> GTerm:
    if isinstance(u, Leaf):
        return Leaf(erase_formula(u.formula))
    return Node(erase_gterm(u.left), erase_gterm(u.right))


def erase_sequent(s: Sequent) -> Sequent:
    return Sequent(erase_gterm(s.antecedent), erase_formula(s.succedent))


def erase_proof(p: Proof) -> Proof:
    return Proof(
        p.rule,
        erase_sequent(p.conclusion),
        p.site,
        tuple(erase_proof(q) for q in p.premises),
    )


# ---------------------------------------------------------------------------
# Environments


@dataclass(frozen=True)
class Environment:
    """The global feature constraint as a persistent value: the conjunction
    of (variable, term) equations accumulated so far."""

    equations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(self.equations))
        object.__setattr__(self, "_solution", solve_equations(self.equations))

    def __hash__(self):
        return self._hash

    @property
    def consistent(self) -> bool:
        return self._solution is not None

    def extend(self, more) -> "Optional[Environment]":
        env = Environment(self.equations + tuple(more))
        return env if env.consistent else None

    def unify(self, x: str, y: str) -> "Optional[Environment]":
        return self.extend(((x, FVar(y)),))

    def _sol(self):
        if self._solution is None:
            raise ValueError("environment is inconsistent")
        return self._solution

    def rep(self, var: str) -> str:
        sol = self._sol()
        if var not in sol.parent:
            raise KeyError(var)
        return sol.find(var)

    def query(self, var: str, path=()):
        """Follow feature edges from ``var``; FAtom at an atom, FVar for a
        constrained-but-atomless node, TOP once the path leaves the
        constrained region.  Stepping through an atom is an error."""
        sol = self._sol()
        if var not in sol.parent:
            raise KeyError(var)
        cur = sol.find(var)
        for f in path:
            if sol.atoms.get(cur) is not None:
                raise ValueError(f"feature path steps through atom at {f!r}")
            nxt = sol.feats.get(cur, {}).get(f)
            if nxt is None:
                return TOP
            cur = sol.find(nxt)
        atom = sol.atoms.get(cur)
        if atom is not None:
            return FAtom(atom)
        return FVar(cur)

    def canonical_text(self) -> str:
        """Deterministic rendering, invariant under fresh-name choices:
        classes are renamed in breadth-first order from the equation
        variables."""
        sol = self._sol()
        anchors = sorted({v for v, _ in self.equations})
        names = {}
        queue = deque()
        for a in anchors:
            if a in sol.parent:
                rep = sol.find(a)
                if rep not in names:
                    names[rep] = f"n{len(names)}"
                    queue.append(rep)
        while queue:
            rep = queue.popleft()
            for f in sorted(sol.feats.get(rep, {})):
                t = sol.find(sol.feats[rep][f])
                if t not in names:
                    names[t] = f"n{len(names)}"
                    queue.append(t)
        parts = [f"{a}={names[sol.find(a)]}" for a in anchors if a in sol.parent]
        for rep in sorted(names, key=names.get):
            atom = sol.atoms.get(rep)
            if atom is not None:
                parts.append(f"{names[rep]}:{atom}")
            for f in sorted(sol.feats.get(rep, {})):
                parts.append(f"{names[rep]}.{f}={names[sol.find(sol.feats[rep][f])]}")
        return ";".join(parts)


def query_env(env: Environment, var: str, path=()):
    return env.query(var, path)


# ---------------------------------------------------------------------------
# Layered proof search


def prove_layered(
    goal: Sequent,
    config: SearchConfig,
    base,
    initial=(),
    max_solutions: Optional[int] = None,
) -> "list[tuple[Proof, Environment]]":
    """All proofs of an annotated sequent together with their final
    environments, consistency-filtered at each axiom.

    ``initial`` holds the conjoined entry constraints of the goal sequent.
    Cut and coordination are unavailable in layered mode.
    """
    if config.allow_cut:
        raise ValueError("cut is disabled in layered mode")
    env0 = Environment(tuple(initial))
    if not env0.consistent:
        return []
    out = []
    for proof, env in _enumerate(goal, env0, config.regime, base):
        out.append((proof, env))
        if max_solutions is not None and len(out) >= max_solutions:
            break
    return out


def _enumerate(seq: Sequent, env: Environment, regime, base) -> Iterator:
    pair = axiom_payloads(seq)
    if pair is not None:
        b1, b2 = pair
        if base.entails(b1.term, b2.term) is Verdict.ENTAILED:
            extended = env.unify(b1.var, b2.var)
            if extended is not None:
                yield Proof(RuleName.AXIOM, seq, None, ()), extended
    for app in rule_applications(seq, regime):
        yield from _thread(app, 0, env, (), regime, base)


def _thread(app, i, env, acc, regime, base) -> Iterator:
    if i == len(app.premises):
        yield Proof(app.rule, app.conclusion, app.site, acc), env
        return
    for proof, extended in _enumerate(app.premises[i], env, regime, base):
        yield from _thread(app, i + 1, extended, acc + (proof,), regime, base)
