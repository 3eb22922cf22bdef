"""Grammars, language membership with coordination, and the compile-out
into a finite family of pure Lambek grammars.

Coordination resolves each conjunction marker over all contiguous,
marker-free windows adjacent to it (innermost structures first, since a
resolved window becomes an ordinary typed unit); candidate types are
lattice joins of the conjunct types, kept only when each conjunct span
derives the candidate on its own.  Multi-word spans are typed against the
subformula closure of the lexicon and the goal, so the enumeration is
finite; this bound is the documented source of incompleteness relative to
the schematic rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

from .baselogic import BaseLogic, IdentityLogic, PosetLogic, PropLogic
from .featurelogic import FeatureLogic, parse_feature_term, solve_equations
from .layered import (
    AnnotatedFormula,
    ConstrainedEntry,
    embed,
    instantiate,
    plain_entry,
    prove_layered,
)
from .prover import (
    Proof,
    RuleName,
    SearchConfig,
    prove,
    proof_to_json,
    proof_to_text,
)
from .syntax import (
    Basic,
    Formula,
    GTerm,
    Leaf,
    Node,
    Over,
    ParseError,
    Regime,
    Sequent,
    Under,
    basic_occurrences,
    formula_key,
    gterm_of,
    parse_annotated_formula,
    parse_formula,
    render_formula,
    subformula_closure,
)


class GrammarError(ValueError):
    """Malformed grammar file or sentence input."""

    def __init__(self, message, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleError(RuntimeError):
    """The bound base logic cannot support the requested operation."""


@dataclass
class Lexicon:
    entries: dict  # word -> tuple[ConstrainedEntry, ...]
    conj_markers: frozenset

    def words(self) -> tuple:
        return tuple(sorted(self.entries))

    def types_of(self, word) -> tuple:
        return tuple(e.typed.skeleton for e in self.entries[word])


@dataclass
class Grammar:
    lexicon: Lexicon
    sentence_type: Formula
    regime: Regime
    base: BaseLogic

    @property
    def layered(self) -> bool:
        return any(
            e.typed.annotations or e.constraints
            for entries in self.lexicon.entries.values()
            for e in entries
        )

    def lexical_formulas(self) -> tuple:
        out = []
        for word in self.lexicon.words():
            out.extend(self.lexicon.types_of(word))
        return tuple(out)


# ---------------------------------------------------------------------------
# Grammar files


_BASES = {"poset": "poset", "prop": "prop", "feature": "feature"}


def load_grammar(path) -> Grammar:
    text = Path(path).read_text(encoding="utf-8")
    return loads_grammar(text)


def loads_grammar(text: str) -> Grammar:
    regime = None
    base_kind = None
    atoms, subs = [], []
    lex_lines = []
    conj_words = []
    goal = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "regime":
            try:
                regime = Regime(rest)
            except ValueError:
                raise GrammarError(f"unknown regime {rest!r}", ln) from None
        elif head == "base":
            if rest not in _BASES:
                raise GrammarError(f"unknown base logic {rest!r}", ln)
            base_kind = rest
        elif head == "atom":
            if not rest or " " in rest:
                raise GrammarError("atom lines declare exactly one name", ln)
            atoms.append(rest)
        elif head == "sub":
            parts = rest.split()
            if len(parts) != 2:
                raise GrammarError("sub lines are 'sub <b1> <b2>'", ln)
            subs.append((parts[0], parts[1]))
        elif head == "lex":
            word, sep, typetext = rest.partition(":")
            if not sep or not word.strip():
                raise GrammarError("lex lines are 'lex <word> : <type>'", ln)
            lex_lines.append((word.strip(), typetext.strip(), ln))
        elif head == "conj":
            if not rest or " " in rest:
                raise GrammarError("conj lines declare exactly one word", ln)
            conj_words.append(rest)
        elif head == "goal":
            goal = (rest, ln)
        else:
            raise GrammarError(f"unknown directive {head!r}", ln)

    if regime is None:
        raise GrammarError("missing 'regime' declaration")
    if base_kind is None:
        raise GrammarError("missing 'base' declaration")
    if goal is None:
        raise GrammarError("missing 'goal' declaration")
    if base_kind == "poset":
        try:
            base = PosetLogic(atoms, subs)
        except ValueError as exc:
            raise GrammarError(str(exc)) from exc
    elif (atoms or subs):
        raise GrammarError("'atom'/'sub' lines require the poset base")
    elif base_kind == "prop":
        base = PropLogic()
    else:
        base = FeatureLogic()

    entries: dict = {}
    for word, rhs, ln in lex_lines:
        typetext, constraint_text = _split_lex_rhs(rhs)
        if (constraint_text or _has_annotation(typetext)) and base_kind != "feature":
            raise GrammarError("layer annotations require the feature base", ln)
        try:
            if base_kind == "feature":
                formula, anns = parse_annotated_formula(typetext, base)
            else:
                formula, anns = parse_formula(typetext, base), ()
            constraints = _parse_constraints(constraint_text) if constraint_text else ()
        except ParseError as exc:
            raise GrammarError(str(exc), ln) from exc
        entry = ConstrainedEntry(AnnotatedFormula(formula, anns), constraints)
        if entry.constraints and solve_equations(entry.constraints) is None:
            raise GrammarError(f"inconsistent constraint on {word!r}", ln)
        entries.setdefault(word, []).append(entry)

    for word in conj_words:
        if word in entries:
            raise GrammarError(f"{word!r} is both typed and a coordination marker")
    if not entries:
        raise GrammarError("empty lexicon")
    try:
        sentence_type = parse_formula(goal[0], base)
    except ParseError as exc:
        raise GrammarError(str(exc), goal[1]) from exc

    lexicon = Lexicon(
        {w: tuple(es) for w, es in entries.items()}, frozenset(conj_words)
    )
    return Grammar(lexicon, sentence_type, regime, base)


def _split_lex_rhs(rhs: str):
    depth = 0
    for i, ch in enumerate(rhs):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "|" and depth == 0:
            return rhs[:i].strip(), rhs[i + 1 :].strip()
    return rhs.strip(), ""


def _has_annotation(typetext: str) -> bool:
    depth = 0
    for ch in typetext:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "^" and depth == 0:
            return True
    return False


def _parse_constraints(text: str):
    constraints = []
    for part in text.split(","):
        var, sep, term = part.partition("=")
        var = var.strip()
        if not sep or not var or not var[0].isupper():
            raise ParseError(f"constraints are 'Var = term': {part.strip()!r}")
        constraints.append((var, parse_feature_term(term.strip())))
    return tuple(constraints)


# ---------------------------------------------------------------------------
# Bracketing shapes


def bracketing_shapes(n: int) -> tuple:
    """All binary trees over ``n`` leaves, as nested (left, right) pairs of
    leaf indices."""

    def build(lo, hi):
        if hi - lo == 1:
            return [lo]
        out = []
        for mid in range(lo + 1, hi):
            for left in build(lo, mid):
                for right in build(mid, hi):
                    out.append((left, right))
        return out

    return tuple(build(0, n))


def shape_to_gterm(shape, formulas) -> GTerm:
    if isinstance(shape, int):
        return Leaf(formulas[shape])
    return Node(shape_to_gterm(shape[0], formulas), shape_to_gterm(shape[1], formulas))


def _antecedents(formulas, regime) -> "list[GTerm]":
    if regime.associative:
        return [gterm_of(formulas)]
    return [shape_to_gterm(s, formulas) for s in bracketing_shapes(len(formulas))]


# ---------------------------------------------------------------------------
# Coordination


def type_join(a: Formula, b: Formula, base) -> Optional[Formula]:
    """Least upper bound of two types: join on basics, recursing covariantly
    on results and contravariantly (meet) on arguments."""
    if isinstance(a, Basic) and isinstance(b, Basic):
        payload = base.join(a.payload, b.payload)
        return Basic(payload) if payload is not None else None
    if isinstance(a, Over) and isinstance(b, Over):
        result = type_join(a.result, b.result, base)
        arg = type_meet(a.arg, b.arg, base)
        return Over(result, arg) if result is not None and arg is not None else None
    if isinstance(a, Under) and isinstance(b, Under):
        result = type_join(a.result, b.result, base)
        arg = type_meet(a.arg, b.arg, base)
        return Under(arg, result) if result is not None and arg is not None else None
    return None


def type_meet(a: Formula, b: Formula, base) -> Optional[Formula]:
    if isinstance(a, Basic) and isinstance(b, Basic):
        payload = base.meet(a.payload, b.payload)
        return Basic(payload) if payload is not None else None
    if isinstance(a, Over) and isinstance(b, Over):
        result = type_meet(a.result, b.result, base)
        arg = type_join(a.arg, b.arg, base)
        return Over(result, arg) if result is not None and arg is not None else None
    if isinstance(a, Under) and isinstance(b, Under):
        result = type_meet(a.result, b.result, base)
        arg = type_join(a.arg, b.arg, base)
        return Under(arg, result) if result is not None and arg is not None else None
    return None


def coordinate(left_types, right_types, base, regime=Regime.L, memo=None) -> tuple:
    """Candidate types for a coordination of two spans given their type
    sets.  A join survives only if each side derives it standalone, which
    realizes the closed-conjunct condition of the coordination schema."""
    if memo is None:
        memo = {}
    config = SearchConfig(regime)
    candidates = set()
    for b in left_types:
        for c in right_types:
            a = type_join(b, c, base)
            if a is not None:
                candidates.add(a)
    kept = []
    for a in sorted(candidates, key=formula_key):
        if _side_proves(left_types, a, config, base, memo) and _side_proves(
            right_types, a, config, base, memo
        ):
            kept.append(a)
    return tuple(kept)


def _side_proves(types, target, config, base, memo) -> bool:
    return any(
        prove(Sequent(Leaf(t), target), config, base, memo) is not None for t in types
    )


# ---------------------------------------------------------------------------
# Membership


@dataclass(frozen=True)
class _CoordInfo:
    marker: str
    left: tuple
    right: tuple


@dataclass(frozen=True)
class _Unit:
    display: str
    types: tuple
    coord: Optional[_CoordInfo] = None


@dataclass(frozen=True)
class _Marker:
    word: str


@dataclass
class MembershipReport:
    sentence: tuple
    accepted: bool
    assignment: Optional[tuple] = None  # ((display, Formula), ...)
    proof: Optional[Proof] = None
    coordination: tuple = ()
    environments: tuple = ()

    def to_text(self) -> str:
        lines = [f"sentence: {' '.join(self.sentence)}", f"result: {'accepted' if self.accepted else 'rejected'}"]
        if self.assignment:
            lines.append("assignment:")
            for display, formula in self.assignment:
                lines.append(f"  {display} : {render_formula(formula)}")
        if self.proof is not None:
            lines.append("proof:")
            lines.extend("  " + l for l in proof_to_text(self.proof).splitlines())
        for cp in self.coordination:
            lines.append("coordination:")
            lines.extend("  " + l for l in proof_to_text(cp).splitlines())
        for i, env in enumerate(self.environments):
            lines.append(f"reading {i}: {env.canonical_text()}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "sentence": list(self.sentence),
            "accepted": self.accepted,
            "assignment": [
                [display, render_formula(f)] for display, f in self.assignment
            ]
            if self.assignment
            else None,
            "proof": proof_to_json(self.proof) if self.proof is not None else None,
            "coordination": [proof_to_json(p) for p in self.coordination],
            "environments": [env.canonical_text() for env in self.environments],
        }


@dataclass
class _MemberCtx:
    grammar: Grammar
    pool: tuple
    memo: dict = field(default_factory=dict)
    span_cache: dict = field(default_factory=dict)
    seen: set = field(default_factory=set)


def membership(grammar: Grammar, words, max_solutions: Optional[int] = None) -> MembershipReport:
    """Decide whether the word sequence is in the grammar's language.

    On acceptance the report carries one witness assignment and proof (and
    the coordination justifications used).  Layered grammars return the
    environment of every surviving reading instead, up to
    ``max_solutions``.
    """
    words = tuple(words)
    if not words:
        raise GrammarError("empty sentence")
    for w in words:
        if w not in grammar.lexicon.entries and w not in grammar.lexicon.conj_markers:
            raise GrammarError(f"unknown word {w!r}")
    if grammar.layered:
        return _layered_membership(grammar, words, max_solutions)

    pool = tuple(
        sorted(
            subformula_closure(grammar.lexical_formulas() + (grammar.sentence_type,)),
            key=formula_key,
        )
    )
    ctx = _MemberCtx(grammar, pool)
    units0 = tuple(
        _Marker(w)
        if w in grammar.lexicon.conj_markers
        else _Unit(w, tuple(sorted(grammar.lexicon.types_of(w), key=formula_key)))
        for w in words
    )
    config = SearchConfig(grammar.regime)
    for units in _expansions(units0, ctx):
        for assignment in product(*[u.types for u in units]):
            for antecedent in _antecedents(list(assignment), grammar.regime):
                proof = prove(
                    Sequent(antecedent, grammar.sentence_type), config, grammar.base, ctx.memo
                )
                if proof is not None:
                    coords = _collect_coordination(units, assignment, ctx)
                    return MembershipReport(
                        sentence=words,
                        accepted=True,
                        assignment=tuple(
                            (u.display, f) for u, f in zip(units, assignment)
                        ),
                        proof=proof,
                        coordination=tuple(coords),
                    )
    return MembershipReport(sentence=words, accepted=False)


def _expansions(units, ctx):
    """Coordination-marker resolution: replace ``X1 conj X2`` windows by
    typed pseudo-units, innermost structures first; yields marker-free unit
    tuples."""
    if not any(isinstance(u, _Marker) for u in units):
        yield units
        return
    for idx, unit in enumerate(units):
        if not isinstance(unit, _Marker):
            continue
        for lstart in range(idx - 1, -1, -1):
            if isinstance(units[lstart], _Marker):
                break
            left = units[lstart:idx]
            for rend in range(idx + 1, len(units)):
                if isinstance(units[rend], _Marker):
                    break
                right = units[idx + 1 : rend + 1]
                candidates = coordinate(
                    _span_types(left, ctx),
                    _span_types(right, ctx),
                    ctx.grammar.base,
                    ctx.grammar.regime,
                    ctx.memo,
                )
                if not candidates:
                    continue
                display = " ".join(
                    [u.display for u in left] + [unit.word] + [u.display for u in right]
                )
                pseudo = _Unit(display, candidates, _CoordInfo(unit.word, left, right))
                reduced = units[:lstart] + (pseudo,) + units[rend + 1 :]
                key = tuple(
                    (u.word,) if isinstance(u, _Marker) else (u.display, u.types)
                    for u in reduced
                )
                if key in ctx.seen:
                    continue
                ctx.seen.add(key)
                yield from _expansions(reduced, ctx)


def _span_types(span, ctx) -> tuple:
    """Types of a contiguous span: its own types for a single unit, else
    the pool candidates the span provably derives."""
    if len(span) == 1:
        return span[0].types
    key = tuple((u.display, u.types) for u in span)
    cached = ctx.span_cache.get(key)
    if cached is None:
        cached = tuple(
            c for c in ctx.pool if _prove_span(span, c, ctx) is not None
        )
        ctx.span_cache[key] = cached
    return cached


def _prove_span(span, target, ctx):
    """First (antecedent, assignment, proof) deriving ``span => target``."""
    config = SearchConfig(ctx.grammar.regime)
    for assignment in product(*[u.types for u in span]):
        for antecedent in _antecedents(list(assignment), ctx.grammar.regime):
            proof = prove(Sequent(antecedent, target), config, ctx.grammar.base, ctx.memo)
            if proof is not None:
                return antecedent, assignment, proof
    return None


def _collect_coordination(units, assignment, ctx) -> list:
    out = []
    for unit, formula in zip(units, assignment):
        if unit.coord is not None:
            out.extend(_coord_justification(unit, formula, ctx))
    return out


def _coord_justification(unit: _Unit, formula: Formula, ctx) -> list:
    info = unit.coord
    left = _prove_span(info.left, formula, ctx)
    right = _prove_span(info.right, formula, ctx)
    if left is None or right is None:
        raise OracleError(
            f"coordination candidate {render_formula(formula)} lost its conjunct proofs"
        )
    lant, lassign, lproof = left
    rant, rassign, rproof = right
    node = Proof(
        RuleName.COORD, Sequent(Node(lant, rant), formula), None, (lproof, rproof)
    )
    nested = _collect_coordination(info.left, lassign, ctx) + _collect_coordination(
        info.right, rassign, ctx
    )
    return [node] + nested


def _layered_membership(grammar, words, max_solutions) -> MembershipReport:
    if any(w in grammar.lexicon.conj_markers for w in words):
        raise OracleError("coordination is unavailable in layered mode")
    config = SearchConfig(grammar.regime)
    solutions = []
    witness = None
    for combo in product(*[grammar.lexicon.entries[w] for w in words]):
        inst = [instantiate(e) for e in combo]
        goal_inst = instantiate(plain_entry(grammar.sentence_type))
        initial = tuple(eq for e in inst for eq in e.constraints)
        formulas = [embed(e) for e in inst]
        succedent = embed(goal_inst)
        for antecedent in _antecedents(formulas, grammar.regime):
            remaining = None if max_solutions is None else max_solutions - len(solutions)
            found = prove_layered(
                Sequent(antecedent, succedent), config, grammar.base, initial, remaining
            )
            for proof, env in found:
                solutions.append((proof, env))
                if witness is None:
                    witness = (combo, formulas, proof)
            if max_solutions is not None and len(solutions) >= max_solutions:
                break
        if max_solutions is not None and len(solutions) >= max_solutions:
            break
    if not solutions:
        return MembershipReport(sentence=words, accepted=False)
    combo, formulas, proof = witness
    return MembershipReport(
        sentence=words,
        accepted=True,
        assignment=tuple(zip(words, formulas)),
        proof=proof,
        environments=tuple(env for _, env in solutions),
    )


# ---------------------------------------------------------------------------
# Compile-out


def super_plus(a: Formula, universe, base) -> frozenset:
    """All ways of replacing positive basic occurrences by supertypes drawn
    from ``universe``."""
    return frozenset(_super(a, 1, 1, universe, base))


def super_minus(a: Formula, universe, base) -> frozenset:
    """As ``super_plus`` for negative occurrences."""
    return frozenset(_super(a, 1, -1, universe, base))


def _super(f, sign, target, universe, base):
    if isinstance(f, Basic):
        out = {f}
        if sign == target:
            for payload in universe:
                if base.holds(f.payload, payload):
                    out.add(Basic(payload))
        return sorted(out, key=formula_key)
    results = _super(f.result, sign, target, universe, base)
    args = _super(f.arg, -sign, target, universe, base)
    if isinstance(f, Over):
        return [Over(r, a) for r in results for a in args]
    return [Under(a, r) for r in results for a in args]


@dataclass
class CompiledFamily:
    lexicon_bar: dict  # word -> tuple[Formula, ...]
    start_types: tuple
    regime: Regime
    base: IdentityLogic

    def grammars(self) -> "list[Grammar]":
        lex = Lexicon(
            {w: tuple(plain_entry(f) for f in fs) for w, fs in self.lexicon_bar.items()},
            frozenset(),
        )
        return [Grammar(lex, s, self.regime, self.base) for s in self.start_types]

    def member(self, words) -> bool:
        return any(membership(g, words).accepted for g in self.grammars())


def compile_out(grammar: Grammar) -> CompiledFamily:
    """Theorem-9 translation: one pure Lambek grammar per weakened start
    type, with every lexical type weakened at positive occurrences."""
    if grammar.layered:
        raise OracleError("compile-out is defined for unannotated grammars")
    if grammar.lexicon.conj_markers:
        raise OracleError("compile-out requires a coordination-free lexicon")

    lex_map = {
        w: list(grammar.lexicon.types_of(w)) for w in grammar.lexicon.words()
    }
    sentence = grammar.sentence_type
    if isinstance(grammar.base, PropLogic):
        rewrite = _prop_class_map(grammar, lex_map, sentence)
        lex_map = {
            w: [_rewrite_payloads(f, rewrite) for f in fs] for w, fs in lex_map.items()
        }
        sentence = _rewrite_payloads(sentence, rewrite)

    occurring = set()
    for fs in lex_map.values():
        for f in fs:
            for _path, _sign, basic in basic_occurrences(f):
                occurring.add(basic.payload)
    universe = sorted(occurring, key=grammar.base.render)

    lexicon_bar = {
        w: tuple(
            sorted(
                {g for f in fs for g in super_plus(f, universe, grammar.base)},
                key=formula_key,
            )
        )
        for w, fs in lex_map.items()
    }
    start_types = tuple(sorted(super_minus(sentence, universe, grammar.base), key=formula_key))
    return CompiledFamily(lexicon_bar, start_types, grammar.regime, IdentityLogic(grammar.base))


def _prop_class_map(grammar, lex_map, sentence) -> dict:
    payloads = set()
    for fs in list(lex_map.values()) + [[sentence]]:
        for f in fs:
            for _path, _sign, basic in basic_occurrences(f):
                payloads.add(basic.payload)
    ordered = sorted(payloads, key=grammar.base.render)
    rewrite = {}
    reps = []
    for p in ordered:
        for rep in reps:
            if grammar.base.holds(p, rep) and grammar.base.holds(rep, p):
                rewrite[p] = rep
                break
        else:
            reps.append(p)
            rewrite[p] = p
    return rewrite


def _rewrite_payloads(f: Formula, mapping) -> Formula:
    if isinstance(f, Basic):
        return Basic(mapping[f.payload])
    if isinstance(f, Over):
        return Over(_rewrite_payloads(f.result, mapping), _rewrite_payloads(f.arg, mapping))
    return Under(_rewrite_payloads(f.arg, mapping), _rewrite_payloads(f.result, mapping))


def compile_out_check(grammar: Grammar, family: CompiledFamily, max_len: int):
    """Brute-force language comparison on every string up to ``max_len``.

    Returns (ok, mismatches, total) where mismatches lists
    (words, direct, family) triples.
    """
    alphabet = grammar.lexicon.words()
    grammars = family.grammars()
    mismatches = []
    total = 0
    for n in range(1, max_len + 1):
        for words in product(alphabet, repeat=n):
            total += 1
            direct = membership(grammar, words).accepted
            compiled = any(membership(g, words).accepted for g in grammars)
            if direct != compiled:
                mismatches.append((words, direct, compiled))
    return not mismatches, mismatches, total


# ---------------------------------------------------------------------------
# The substitution oracle for the subtype characterisation


def substitution_set(a: Formula, base: PosetLogic) -> frozenset:
    """All formulae reachable from ``a`` by replacing negative basic
    occurrences with subtypes and positive ones with supertypes."""

    def walk(f, sign):
        if isinstance(f, Basic):
            names = base.supertypes_of(f.payload) if sign > 0 else base.subtypes_of(f.payload)
            return [Basic(p) for p in names]
        results = walk(f.result, sign)
        args = walk(f.arg, -sign)
        if isinstance(f, Over):
            return [Over(r, g) for r in results for g in args]
        return [Under(g, r) for r in results for g in args]

    return frozenset(walk(a, 1))


def lemma12_oracle(a: Formula, b: Formula, base: PosetLogic) -> bool:
    """Substitution characterisation of the lifted subtype relation; must
    agree with ``subtype`` everywhere."""
    return b in substitution_set(a, base)
