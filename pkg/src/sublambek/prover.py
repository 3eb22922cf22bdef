"""Cut-free backward proof search for the four subtyped Lambek regimes,
plus a bounded cut-enabled mode and the admissible monotonicity rules.

Search is goal-directed: right rules are tried before left rules, left-rule
sites are enumerated left to right, and results are memoized on
regime-canonical sequents.  Every cut-free rule strictly reduces the total
connective count, so the search always terminates.  A proof search is
single-threaded; distinct searches may run concurrently over shared
read-only oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterator, Optional

from .syntax import (
    Basic,
    Formula,
    GTerm,
    Leaf,
    Node,
    Over,
    Regime,
    Sequent,
    Under,
    canonicalize,
    connectives,
    fold_gterms,
    fold_item_path,
    formula_key,
    gterm_nodes,
    gterm_of,
    gterm_paths,
    leaves,
    parse_formula,
    render_formula,
    render_sequent,
    replace_subgterm,
    sequents_equal,
    subformula_closure,
    subgterm_at,
    subtype,
)


class RuleName(Enum):
    AXIOM = "Ax"
    SLASH_L = "/L"
    SLASH_R = "/R"
    BACKSLASH_L = "\\L"
    BACKSLASH_R = "\\R"
    CUT = "Cut"
    STRENGTHEN_L = "strengthenL"
    WEAKEN_R = "weakenR"
    COORD = "co"


@dataclass(frozen=True)
class Proof:
    rule: RuleName
    conclusion: Sequent
    site: Optional[tuple]
    premises: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "_hash", hash((self.rule, self.conclusion, self.site, self.premises))
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class SearchConfig:
    regime: Regime
    allow_cut: bool = False
    cut_depth_bound: int = 0
    memoize: bool = True

    def __post_init__(self):
        if self.cut_depth_bound < 0:
            raise ValueError("cut_depth_bound must be >= 0")


@dataclass(frozen=True)
class RuleApp:
    rule: RuleName
    conclusion: Sequent
    site: Optional[tuple]
    premises: tuple


class ProofError(ValueError):
    """A proof object fails node-local validation."""


class AdmissibilityError(RuntimeError):
    """An admissible rule's re-proof failed; this indicates a prover bug."""


def axiom_payloads(seq: Sequent):
    """The (b1, b2) payload pair if the sequent matches the axiom shape."""
    if isinstance(seq.antecedent, Leaf) and isinstance(seq.antecedent.formula, Basic):
        if isinstance(seq.succedent, Basic):
            return seq.antecedent.formula.payload, seq.succedent.payload
    return None


def sequent_connectives(seq: Sequent) -> int:
    return sum(connectives(f) for f in leaves(seq.antecedent)) + connectives(seq.succedent)


# ---------------------------------------------------------------------------
# Rule application enumeration


def rule_applications(seq: Sequent, regime: Regime) -> "list[RuleApp]":
    """All backward applications of the logical rules, right rules first,
    left-rule sites left to right.  Shared by the plain and the layered
    searches."""
    apps = []
    succ = seq.succedent
    ant = seq.antecedent
    if isinstance(succ, Over):
        prem = Sequent(Node(ant, Leaf(succ.arg)), succ.result)
        apps.append(RuleApp(RuleName.SLASH_R, seq, None, (prem,)))
    elif isinstance(succ, Under):
        prem = Sequent(Node(Leaf(succ.arg), ant), succ.result)
        apps.append(RuleApp(RuleName.BACKSLASH_R, seq, None, (prem,)))

    if regime.associative:
        apps.extend(_left_apps_sequence(seq, regime))
    else:
        apps.extend(_left_apps_tree(seq, regime))
    return apps


def _left_apps_tree(seq: Sequent, regime: Regime) -> "list[RuleApp]":
    apps = []
    seen = set()
    succ = seq.succedent
    for path, node in gterm_nodes(seq.antecedent):
        candidates = []
        left, right = node.left, node.right
        if isinstance(left, Leaf) and isinstance(left.formula, Over):
            candidates.append((RuleName.SLASH_L, left.formula, right))
        if isinstance(right, Leaf) and isinstance(right.formula, Under):
            candidates.append((RuleName.BACKSLASH_L, right.formula, left))
        if regime.commutative:
            if isinstance(right, Leaf) and isinstance(right.formula, Over):
                candidates.append((RuleName.SLASH_L, right.formula, left))
            if isinstance(left, Leaf) and isinstance(left.formula, Under):
                candidates.append((RuleName.BACKSLASH_L, left.formula, right))
        for rule, functor, v in candidates:
            prem1 = Sequent(v, functor.arg)
            prem2 = Sequent(
                replace_subgterm(seq.antecedent, path, Leaf(functor.result)), succ
            )
            key = (rule, prem1, prem2)
            if key in seen:
                continue
            seen.add(key)
            apps.append(RuleApp(rule, seq, path, (prem1, prem2)))
    return apps


def _left_apps_sequence(seq: Sequent, regime: Regime) -> "list[RuleApp]":
    if regime is Regime.L:
        return list(_left_apps_l(seq))
    return list(_left_apps_lp(seq))


def _left_apps_l(seq: Sequent) -> "Iterator[RuleApp]":
    ls = leaves(seq.antecedent)
    succ = seq.succedent
    n = len(ls)
    for i, f in enumerate(ls):
        if isinstance(f, Over):
            for j in range(i + 1, n):
                v = ls[i + 1 : j + 1]
                prem1 = Sequent(gterm_of(v), f.arg)
                prem2 = Sequent(gterm_of(ls[:i] + [f.result] + ls[j + 1 :]), succ)
                items = (
                    [Leaf(x) for x in ls[:i]]
                    + [Node(Leaf(f), gterm_of(v))]
                    + [Leaf(x) for x in ls[j + 1 :]]
                )
                concl = Sequent(fold_gterms(items), succ)
                site = fold_item_path(len(items), i)
                yield RuleApp(RuleName.SLASH_L, concl, site, (prem1, prem2))
        elif isinstance(f, Under):
            for k in range(i):
                v = ls[k:i]
                prem1 = Sequent(gterm_of(v), f.arg)
                prem2 = Sequent(gterm_of(ls[:k] + [f.result] + ls[i + 1 :]), succ)
                items = (
                    [Leaf(x) for x in ls[:k]]
                    + [Node(gterm_of(v), Leaf(f))]
                    + [Leaf(x) for x in ls[i + 1 :]]
                )
                concl = Sequent(fold_gterms(items), succ)
                site = fold_item_path(len(items), k)
                yield RuleApp(RuleName.BACKSLASH_L, concl, site, (prem1, prem2))


def _left_apps_lp(seq: Sequent) -> "Iterator[RuleApp]":
    ms = sorted(leaves(seq.antecedent), key=formula_key)
    succ = seq.succedent
    done = set()
    for f in ms:
        if f in done or isinstance(f, Basic):
            continue
        done.add(f)
        rule = RuleName.SLASH_L if isinstance(f, Over) else RuleName.BACKSLASH_L
        rest = list(ms)
        rest.remove(f)
        for v, remaining in _submultisets(rest):
            prem1 = Sequent(gterm_of(v), f.arg)
            prem2 = Sequent(
                gterm_of(sorted(remaining + [f.result], key=formula_key)), succ
            )
            redex = (
                Node(Leaf(f), gterm_of(v))
                if isinstance(f, Over)
                else Node(gterm_of(v), Leaf(f))
            )
            items = [redex] + [Leaf(x) for x in remaining]
            concl = Sequent(fold_gterms(items), succ)
            site = fold_item_path(len(items), 0)
            yield RuleApp(rule, concl, site, (prem1, prem2))


def _submultisets(items):
    """Nonempty sub-multisets of a key-sorted formula list, with the
    complementary remainder."""
    groups = []
    for f in items:
        if groups and groups[-1][0] == f:
            groups[-1][1] += 1
        else:
            groups.append([f, 1])
    ranges = [range(count + 1) for _, count in groups]
    for combo in product(*ranges):
        if not any(combo):
            continue
        sub, rest = [], []
        for (f, count), k in zip(groups, combo):
            sub.extend([f] * k)
            rest.extend([f] * (count - k))
        yield sub, rest


def cut_applications(seq: Sequent, regime: Regime, cut_formulas) -> "Iterator[RuleApp]":
    """Backward Cut applications with the cut formula drawn from
    ``cut_formulas`` (the goal's subformula closure, in practice)."""
    succ = seq.succedent
    if regime is Regime.L:
        ls = leaves(seq.antecedent)
        n = len(ls)
        for i in range(n):
            for j in range(i, n):
                segment = ls[i : j + 1]
                vterm = gterm_of(segment)
                items = (
                    [Leaf(x) for x in ls[:i]] + [vterm] + [Leaf(x) for x in ls[j + 1 :]]
                )
                concl = Sequent(fold_gterms(items), succ)
                site = fold_item_path(len(items), i)
                for a in cut_formulas:
                    prem1 = Sequent(vterm, a)
                    prem2 = Sequent(gterm_of(ls[:i] + [a] + ls[j + 1 :]), succ)
                    yield RuleApp(RuleName.CUT, concl, site, (prem1, prem2))
    elif regime is Regime.LP:
        ms = sorted(leaves(seq.antecedent), key=formula_key)
        for v, remaining in _submultisets(ms):
            vterm = gterm_of(v)
            items = [vterm] + [Leaf(x) for x in remaining]
            concl = Sequent(fold_gterms(items), succ)
            site = fold_item_path(len(items), 0)
            for a in cut_formulas:
                prem1 = Sequent(vterm, a)
                prem2 = Sequent(gterm_of(sorted(remaining + [a], key=formula_key)), succ)
                yield RuleApp(RuleName.CUT, concl, site, (prem1, prem2))
    else:
        for path in gterm_paths(seq.antecedent):
            vterm = subgterm_at(seq.antecedent, path)
            for a in cut_formulas:
                prem1 = Sequent(vterm, a)
                prem2 = Sequent(replace_subgterm(seq.antecedent, path, Leaf(a)), succ)
                yield RuleApp(RuleName.CUT, seq, path, (prem1, prem2))


# ---------------------------------------------------------------------------
# Search


def prove(sequent: Sequent, config: SearchConfig, base, memo=None) -> Optional[Proof]:
    """First proof found by backward search, or None when unprovable.

    ``memo`` may be a shared table, but only for cut-free configurations
    and only across searches with the same regime and base oracle
    (provability depends on both).
    """
    if config.allow_cut:
        if memo is not None:
            raise ValueError("shared memo tables are only sound for cut-free search")
        cut_formulas = sorted(
            subformula_closure(leaves(sequent.antecedent) + [sequent.succedent]),
            key=formula_key,
        )
        return _search(
            sequent, config.regime, base, {}, cut_formulas, config.cut_depth_bound, True
        )
    table = {} if memo is None else memo
    return _search(sequent, config.regime, base, table, None, 0, config.memoize)


def prove_with_cut(sequent: Sequent, config: SearchConfig, base) -> Optional[Proof]:
    """As ``prove`` with the bounded Cut rule enabled; the cut formulae are
    restricted to the goal's subformula closure to keep search finite."""
    if not config.allow_cut:
        raise ValueError("prove_with_cut requires allow_cut")
    return prove(sequent, config, base)


def _search(seq, regime, base, memo, cut_formulas, budget, memoize) -> Optional[Proof]:
    key = (canonicalize(seq.antecedent, regime), seq.succedent, budget)
    if memoize and key in memo:
        return memo[key]
    result = None
    pair = axiom_payloads(seq)
    if pair is not None and base.holds(*pair):
        result = Proof(RuleName.AXIOM, seq, None, ())
    if result is None:
        for app in rule_applications(seq, regime):
            premises = _search_premises(
                app.premises, regime, base, memo, cut_formulas, budget, memoize
            )
            if premises is not None:
                result = Proof(app.rule, app.conclusion, app.site, premises)
                break
    if result is None and cut_formulas is not None and budget > 0:
        for app in cut_applications(seq, regime, cut_formulas):
            premises = _search_premises(
                app.premises, regime, base, memo, cut_formulas, budget - 1, memoize
            )
            if premises is not None:
                result = Proof(app.rule, app.conclusion, app.site, premises)
                break
    if memoize:
        memo[key] = result
    return result


def _search_premises(premises, regime, base, memo, cut_formulas, budget, memoize):
    proofs = []
    for prem in premises:
        p = _search(prem, regime, base, memo, cut_formulas, budget, memoize)
        if p is None:
            return None
        proofs.append(p)
    return tuple(proofs)


# ---------------------------------------------------------------------------
# Proof validation


def check_proof(proof: Proof, regime: Regime, base, goal: Optional[Sequent] = None):
    """Revalidate every node against its rule schema; raises ProofError.

    Conclusions are compared modulo the regime's structural identity, since
    rule applications may restructure the stored representative."""
    if goal is not None and not sequents_equal(proof.conclusion, goal, regime):
        raise ProofError(
            f"proof concludes {render_sequent(proof.conclusion)}, "
            f"expected {render_sequent(goal)}"
        )
    _check_node(proof, regime, base)


def _ceq(u: GTerm, v: GTerm, regime: Regime) -> bool:
    return canonicalize(u, regime) == canonicalize(v, regime)


def _check_node(p: Proof, regime: Regime, base):
    concl = p.conclusion
    rule = p.rule
    if rule is RuleName.AXIOM:
        pair = axiom_payloads(concl)
        if pair is None or p.premises:
            raise ProofError(f"malformed axiom node {render_sequent(concl)}")
        if not base.holds(*pair):
            raise ProofError(f"axiom side condition fails: {render_sequent(concl)}")
        return
    if rule is RuleName.SLASH_R or rule is RuleName.BACKSLASH_R:
        succ = concl.succedent
        wanted = Over if rule is RuleName.SLASH_R else Under
        if not isinstance(succ, wanted) or len(p.premises) != 1:
            raise ProofError(f"malformed right-rule node {render_sequent(concl)}")
        (prem,) = p.premises
        if rule is RuleName.SLASH_R:
            expected = Node(concl.antecedent, Leaf(succ.arg))
        else:
            expected = Node(Leaf(succ.arg), concl.antecedent)
        if prem.conclusion.succedent != succ.result or not _ceq(
            prem.conclusion.antecedent, expected, regime
        ):
            raise ProofError(f"right-rule premise mismatch at {render_sequent(concl)}")
    elif rule in (RuleName.SLASH_L, RuleName.BACKSLASH_L):
        if p.site is None or len(p.premises) != 2:
            raise ProofError(f"malformed left-rule node {render_sequent(concl)}")
        node = subgterm_at(concl.antecedent, p.site)
        if not isinstance(node, Node):
            raise ProofError(f"left-rule site is not a node in {render_sequent(concl)}")
        shape = Over if rule is RuleName.SLASH_L else Under
        candidates = []
        fun_side, v_side = (node.left, node.right) if shape is Over else (node.right, node.left)
        if isinstance(fun_side, Leaf) and isinstance(fun_side.formula, shape):
            candidates.append((fun_side.formula, v_side))
        if regime.commutative and isinstance(v_side, Leaf) and isinstance(v_side.formula, shape):
            candidates.append((v_side.formula, fun_side))
        prem1, prem2 = p.premises
        ok = False
        for functor, v in candidates:
            rebuilt = replace_subgterm(concl.antecedent, p.site, Leaf(functor.result))
            if (
                prem1.conclusion.succedent == functor.arg
                and _ceq(prem1.conclusion.antecedent, v, regime)
                and prem2.conclusion.succedent == concl.succedent
                and _ceq(prem2.conclusion.antecedent, rebuilt, regime)
            ):
                ok = True
                break
        if not ok:
            raise ProofError(f"left-rule premises mismatch at {render_sequent(concl)}")
    elif rule is RuleName.CUT:
        if p.site is None or len(p.premises) != 2:
            raise ProofError(f"malformed cut node {render_sequent(concl)}")
        prem1, prem2 = p.premises
        v = subgterm_at(concl.antecedent, p.site)
        cut_formula = prem1.conclusion.succedent
        rebuilt = replace_subgterm(concl.antecedent, p.site, Leaf(cut_formula))
        if (
            not _ceq(prem1.conclusion.antecedent, v, regime)
            or prem2.conclusion.succedent != concl.succedent
            or not _ceq(prem2.conclusion.antecedent, rebuilt, regime)
        ):
            raise ProofError(f"cut premises mismatch at {render_sequent(concl)}")
    elif rule is RuleName.COORD:
        if len(p.premises) != 2:
            raise ProofError("coordination nodes have exactly two premises")
        prem1, prem2 = p.premises
        if (
            prem1.conclusion.succedent != concl.succedent
            or prem2.conclusion.succedent != concl.succedent
            or not _ceq(
                concl.antecedent,
                Node(prem1.conclusion.antecedent, prem2.conclusion.antecedent),
                regime,
            )
        ):
            raise ProofError(f"coordination premises mismatch at {render_sequent(concl)}")
    else:
        raise ProofError(f"rule {rule.value} may not occur inside a stored proof")
    for prem in p.premises:
        _check_node(prem, regime, base)


def nonaxiom_count(p: Proof) -> int:
    n = 0 if p.rule is RuleName.AXIOM else 1
    return n + sum(nonaxiom_count(q) for q in p.premises)


# ---------------------------------------------------------------------------
# Admissible rules (realized by re-proving, per cut elimination)


def check_subtype_derivable(a: Formula, b: Formula, base, regime=Regime.NL, memo=None) -> Proof:
    """Theorem: subtype-related formulae are derivable as sequents."""
    if not subtype(a, b, base):
        raise ValueError(f"{render_formula(a)} is not a subtype of {render_formula(b)}")
    proof = prove(Sequent(Leaf(a), b), SearchConfig(regime), base, memo)
    if proof is None:
        raise AdmissibilityError(
            f"subtype pair underivable in {regime.value}: "
            f"{render_formula(a)} => {render_formula(b)}"
        )
    return proof


def check_strengthen_left(proof: Proof, occ: tuple, a: Formula, base, regime=Regime.NL, memo=None) -> Proof:
    """Replace the leaf at ``occ`` by a subtype of its formula and re-prove."""
    concl = proof.conclusion
    target = subgterm_at(concl.antecedent, occ)
    if not isinstance(target, Leaf):
        raise ValueError("strengthening site must be a G-term leaf")
    if not subtype(a, target.formula, base):
        raise ValueError(
            f"{render_formula(a)} is not a subtype of {render_formula(target.formula)}"
        )
    goal = Sequent(replace_subgterm(concl.antecedent, occ, Leaf(a)), concl.succedent)
    strengthened = prove(goal, SearchConfig(regime), base, memo)
    if strengthened is None:
        raise AdmissibilityError(f"strengthen-L failed on {render_sequent(goal)}")
    return strengthened


def check_weaken_right(proof: Proof, b: Formula, base, regime=Regime.NL, memo=None) -> Proof:
    """Replace the succedent by a supertype and re-prove."""
    concl = proof.conclusion
    if not subtype(concl.succedent, b, base):
        raise ValueError(
            f"{render_formula(concl.succedent)} is not a subtype of {render_formula(b)}"
        )
    goal = Sequent(concl.antecedent, b)
    weakened = prove(goal, SearchConfig(regime), base, memo)
    if weakened is None:
        raise AdmissibilityError(f"weaken-R failed on {render_sequent(goal)}")
    return weakened


# ---------------------------------------------------------------------------
# Serialization


def proof_to_text(p: Proof) -> str:
    lines = []

    def walk(node, depth):
        lines.append("  " * depth + f"{node.rule.value:<4} {render_sequent(node.conclusion)}")
        for prem in node.premises:
            walk(prem, depth + 1)

    walk(p, 0)
    return "\n".join(lines)


def _gterm_to_json(u: GTerm):
    if isinstance(u, Leaf):
        return {"leaf": render_formula(u.formula)}
    return {"left": _gterm_to_json(u.left), "right": _gterm_to_json(u.right)}


def _gterm_from_json(data, base) -> GTerm:
    if "leaf" in data:
        return Leaf(parse_formula(data["leaf"], base))
    return Node(_gterm_from_json(data["left"], base), _gterm_from_json(data["right"], base))


def proof_to_json(p: Proof) -> dict:
    return {
        "rule": p.rule.value,
        "conclusion": {
            "antecedent": _gterm_to_json(p.conclusion.antecedent),
            "succedent": render_formula(p.conclusion.succedent),
        },
        "site": list(p.site) if p.site is not None else None,
        "premises": [proof_to_json(q) for q in p.premises],
    }


def proof_from_json(data: dict, base) -> Proof:
    rule = RuleName(data["rule"])
    conclusion = Sequent(
        _gterm_from_json(data["conclusion"]["antecedent"], base),
        parse_formula(data["conclusion"]["succedent"], base),
    )
    site = tuple(data["site"]) if data.get("site") is not None else None
    premises = tuple(proof_from_json(q, base) for q in data.get("premises", ()))
    return Proof(rule, conclusion, site, premises)
