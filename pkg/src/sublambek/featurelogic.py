"""Feature logic: term syntax, normalization to solved forms, entailment
checking, unification (meet) and generalization (join).

The entailment checker simplifies a *guard* against a *context* with three
rewrite rules (atom cancellation, feature cancellation, and substitution of
an existential guard variable by the context's feature target) and then
classifies the residue as Entailed, Disentailed, or Blocked.  An independent
graph-simulation oracle is provided for cross-checking.

Normalization and entailment are iterative throughout, so deeply nested
feature chains do not hit the interpreter recursion limit.  Fresh-variable
names are allocated per solver instance; solvers are never shared.
"""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .baselogic import BaseLogic, Verdict
from .syntax import ParseError

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class FVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FAtom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FTop:
    def __str__(self):
        return "top"


@dataclass(frozen=True)
class FBottom:
    def __str__(self):
        return "bot"


@dataclass(frozen=True)
class FFeat:
    feature: str
    value: "FeatureTerm"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.feature, self.value)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        val = str(self.value)
        if isinstance(self.value, FConj):
            val = f"({val})"
        return f"{self.feature}:{val}"


@dataclass(frozen=True)
class FExists:
    var: str
    body: "FeatureTerm"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("ex", self.var, self.body)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"exists {self.var} ({self.body})"


@dataclass(frozen=True)
class FConj:
    left: "FeatureTerm"
    right: "FeatureTerm"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("&", self.left, self.right)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        left = str(self.left)
        right = str(self.right)
        if isinstance(self.right, FConj):
            right = f"({right})"
        return f"{left} & {right}"


FeatureTerm = FVar | FAtom | FTop | FBottom | FFeat | FExists | FConj

TOP = FTop()
BOT = FBottom()


def conj(*terms: "FeatureTerm") -> "FeatureTerm":
    if not terms:
        return TOP
    acc = terms[0]
    for t in terms[1:]:
        acc = FConj(acc, t)
    return acc


def feature_chain(features: Iterable[str], tip: "FeatureTerm") -> "FeatureTerm":
    """f1:f2:...:tip, built iteratively."""
    term = tip
    for f in reversed(list(features)):
        term = FFeat(f, term)
    return term


def rename_var(term, old: str, new: str):
    if isinstance(term, FVar):
        return FVar(new) if term.name == old else term
    if isinstance(term, (FAtom, FTop, FBottom)):
        return term
    if isinstance(term, FFeat):
        return FFeat(term.feature, rename_var(term.value, old, new))
    if isinstance(term, FConj):
        return FConj(rename_var(term.left, old, new), rename_var(term.right, old, new))
    if term.var == old:
        return term
    return FExists(term.var, rename_var(term.body, old, new))


def free_vars(term) -> set:
    out = set()
    stack = [(term, frozenset())]
    while stack:
        t, bound = stack.pop()
        if isinstance(t, FVar):
            if t.name not in bound:
                out.add(t.name)
        elif isinstance(t, FFeat):
            stack.append((t.value, bound))
        elif isinstance(t, FConj):
            stack.append((t.left, bound))
            stack.append((t.right, bound))
        elif isinstance(t, FExists):
            stack.append((t.body, bound | {t.var}))
    return out


# ---------------------------------------------------------------------------
# Simple constraints and solved forms


@dataclass(frozen=True)
class EqAtom:
    """x = a"""

    var: str
    atom: str


@dataclass(frozen=True)
class EqTop:
    """x = top (vacuous; kept as the sole record of an unconstrained var)"""

    var: str


@dataclass(frozen=True)
class EqFeat:
    """x = f : y"""

    var: str
    feature: str
    target: str


Constraint = EqAtom | EqTop | EqFeat


def _constraint_sort_key(c):
    if isinstance(c, EqAtom):
        return (c.var, 0, c.atom, "")
    if isinstance(c, EqTop):
        return (c.var, 1, "", "")
    return (c.var, 2, c.feature, c.target)


@dataclass(frozen=True)
class SolvedForm:
    """Existential prefix plus a clash-free, feature-functional conjunction
    of simple constraints.  ``root`` is the one free variable."""

    root: str
    bound: tuple
    constraints: frozenset

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.root, self.bound, self.constraints)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        body = " & ".join(_render_constraint(c) for c in sorted(self.constraints, key=_constraint_sort_key))
        if self.bound:
            return f"exists {' '.join(self.bound)} ({body})"
        return body

    def atom_of(self, var) -> Optional[str]:
        for c in self.constraints:
            if isinstance(c, EqAtom) and c.var == var:
                return c.atom
        return None

    def features_of(self, var) -> dict:
        return {c.feature: c.target for c in self.constraints if isinstance(c, EqFeat) and c.var == var}

    def variables(self) -> set:
        return {self.root, *self.bound}

    def is_cyclic(self) -> bool:
        feats = defaultdict(dict)
        for c in self.constraints:
            if isinstance(c, EqFeat):
                feats[c.var][c.feature] = c.target
        state = {}

        def reaches_back(v):
            stack = [(v, iter(sorted(feats.get(v, {}).values())))]
            state[v] = 1
            while stack:
                var, it = stack[-1]
                advanced = False
                for nxt in it:
                    if state.get(nxt) == 1:
                        return True
                    if nxt not in state:
                        state[nxt] = 1
                        stack.append((nxt, iter(sorted(feats.get(nxt, {}).values()))))
                        advanced = True
                        break
                if not advanced:
                    state[var] = 2
                    stack.pop()
            return False

        return any(reaches_back(v) for v in sorted(self.variables()) if state.get(v) is None)

    def to_term(self) -> "FeatureTerm":
        """Reconstruct a feature term denoting the same set at the root.

        Each bound variable's description is inlined at its first
        occurrence; later occurrences refer to it by name.  Raises on
        cyclic solved forms, which have no finite term presentation.
        """
        if self.is_cyclic():
            raise ValueError("cyclic solved form has no term presentation")
        atoms = {c.var: c.atom for c in self.constraints if isinstance(c, EqAtom)}
        feats = defaultdict(dict)
        for c in self.constraints:
            if isinstance(c, EqFeat):
                feats[c.var][c.feature] = c.target
        inlined = set()
        shared = _shared_targets(self.constraints)

        def describe(var):
            parts = []
            if var in atoms:
                parts.append(FAtom(atoms[var]))
            for f in sorted(feats.get(var, {})):
                target = feats[var][f]
                if target in inlined or target == self.root:
                    parts.append(FFeat(f, FVar(target)))
                else:
                    inlined.add(target)
                    sub = describe(target)
                    if target in shared:
                        sub = FVar(target) if isinstance(sub, FTop) else FConj(FVar(target), sub)
                    parts.append(FFeat(f, sub))
            if not parts:
                return TOP
            return conj(*parts)

        body = describe(self.root)
        used = free_vars(body) - {self.root}
        for v in self.bound:
            if v in used:
                body = FExists(v, body)
        return body


def _shared_targets(constraints) -> set:
    counts = defaultdict(int)
    for c in constraints:
        if isinstance(c, EqFeat):
            counts[c.target] += 1
    return {v for v, n in counts.items() if n > 1}


def _render_constraint(c) -> str:
    if isinstance(c, EqAtom):
        return f"{c.var}={c.atom}"
    if isinstance(c, EqTop):
        return f"{c.var}=top"
    return f"{c.var}={c.feature}:{c.target}"


# ---------------------------------------------------------------------------
# The solver


class _Solver:
    """Union-find normalization of equations ``var = term`` into atom and
    feature tables, with clash detection."""

    def __init__(self, prefix="_v"):
        self.prefix = prefix
        self.parent = {}
        self.created = {}
        self.order = []
        self.atoms = {}
        self.feats = {}
        self.n = 0

    def see(self, v):
        if v not in self.parent:
            self.parent[v] = v
            self.created[v] = len(self.order)
            self.order.append(v)

    def fresh(self) -> str:
        name = f"{self.prefix}{self.n}"
        self.n += 1
        self.see(name)
        return name

    def find(self, v) -> str:
        p = self.parent
        root = v
        while p[root] != root:
            root = p[root]
        while p[v] != root:
            p[v], v = root, p[v]
        return root

    def union(self, a, b) -> bool:
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if self.created[ry] < self.created[rx]:
                rx, ry = ry, rx
            self.parent[ry] = rx
            atom_y = self.atoms.pop(ry, None)
            if atom_y is not None:
                atom_x = self.atoms.get(rx)
                if atom_x is not None and atom_x != atom_y:
                    return False
                self.atoms[rx] = atom_y
            feats_y = self.feats.pop(ry, None)
            if feats_y:
                feats_x = self.feats.setdefault(rx, {})
                for f, t in feats_y.items():
                    if f in feats_x:
                        stack.append((feats_x[f], t))
                    else:
                        feats_x[f] = t
            if rx in self.atoms and self.feats.get(rx):
                return False
        return True

    def assign(self, var, term) -> bool:
        work = deque([(var, term)])
        while work:
            v, t = work.popleft()
            self.see(v)
            rv = self.find(v)
            if isinstance(t, FTop):
                continue
            if isinstance(t, FBottom):
                return False
            if isinstance(t, FAtom):
                if self.feats.get(rv):
                    return False
                cur = self.atoms.get(rv)
                if cur is not None and cur != t.name:
                    return False
                self.atoms[rv] = t.name
            elif isinstance(t, FVar):
                self.see(t.name)
                if not self.union(v, t.name):
                    return False
            elif isinstance(t, FFeat):
                if self.atoms.get(rv) is not None:
                    return False
                fmap = self.feats.setdefault(rv, {})
                target = fmap.get(t.feature)
                if isinstance(t.value, FVar):
                    self.see(t.value.name)
                    if target is None:
                        fmap[t.feature] = self.find(t.value.name)
                    elif not self.union(target, t.value.name):
                        return False
                elif target is None:
                    y = self.fresh()
                    fmap[t.feature] = y
                    work.append((y, t.value))
                else:
                    work.append((target, t.value))
            elif isinstance(t, FExists):
                alias = self.fresh()
                work.append((v, rename_var(t.body, t.var, alias)))
            elif isinstance(t, FConj):
                work.append((v, t.left))
                work.append((v, t.right))
            else:
                raise TypeError(f"not a feature term: {t!r}")
        return True

    def seed(self, sf: "SolvedForm", root: str) -> bool:
        """Load an already-solved form, renaming its root to ``root`` and
        its bound variables fresh."""
        names = {sf.root: root}
        for b in sf.bound:
            names[b] = self.fresh()
        self.see(root)
        for c in sorted(sf.constraints, key=_constraint_sort_key):
            v = names.get(c.var, c.var)
            if isinstance(c, EqAtom):
                if not self.assign(v, FAtom(c.atom)):
                    return False
            elif isinstance(c, EqFeat):
                t = names.get(c.target, c.target)
                if not self.assign(v, FFeat(c.feature, FVar(t))):
                    return False
            else:
                self.see(v)
        return True

    def project(self, root: str, free: set, bound_prefix: str = "V") -> "SolvedForm":
        """Canonical solved form rooted at ``root``: bound classes are
        renamed ``V0, V1, ...`` in breadth-first discovery order."""
        members = defaultdict(list)
        for v in self.order:
            members[self.find(v)].append(v)
        root_rep = self.find(root)

        display = {}
        taken = set(free)

        def pick_name(rep):
            if rep in display:
                return
            frees = sorted(m for m in members[rep] if m in free)
            if rep == root_rep and root in free:
                display[rep] = root
            elif frees:
                display[rep] = frees[0]
            else:
                display[rep] = None

        visited = []
        seen = {root_rep}
        queue = deque([root_rep])
        while queue:
            rep = queue.popleft()
            visited.append(rep)
            pick_name(rep)
            for f in sorted(self.feats.get(rep, {})):
                t = self.find(self.feats[rep][f])
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        for v in self.order:
            rep = self.find(v)
            if rep not in seen:
                seen.add(rep)
                visited.append(rep)
                pick_name(rep)

        i = 0
        for rep in visited:
            if display[rep] is None:
                while f"{bound_prefix}{i}" in taken:
                    i += 1
                display[rep] = f"{bound_prefix}{i}"
                i += 1

        constraints = []
        bound = []
        for rep in visited:
            name = display[rep]
            if name != display[root_rep] and name not in free:
                bound.append(name)
            atom = self.atoms.get(rep)
            feats = self.feats.get(rep, {})
            if atom is not None:
                constraints.append(EqAtom(name, atom))
            for f in sorted(feats):
                constraints.append(EqFeat(name, f, display[self.find(feats[f])]))
            if atom is None and not feats:
                constraints.append(EqTop(name))
        return SolvedForm(display[root_rep], tuple(bound), frozenset(constraints))


def solve_equations(equations, prefix="_v") -> Optional[_Solver]:
    """Normalize a conjunction of ``var = term`` equations; None on clash.

    The returned solver exposes ``find``, ``atoms`` and ``feats`` (keyed by
    representatives) for querying the solved constraint graph.
    """
    solver = _Solver(prefix=prefix)
    for var, term in equations:
        if not solver.assign(var, term):
            return None
    return solver


def normalize(var: str, term) -> Optional[SolvedForm]:
    """Solved form equisatisfiable with ``var = term``, or None on clash.

    Free variables of ``term`` keep their names; if the term equates two
    free variables, they collapse to one representative name.
    """
    if isinstance(term, SolvedForm):
        solver = _Solver()
        if not solver.seed(term, var):
            return None
        return solver.project(var, {var} | _sf_free(term))
    solver = _Solver()
    if not solver.assign(var, term):
        return None
    return solver.project(var, {var} | free_vars(term))


def _sf_free(sf: SolvedForm) -> set:
    mentioned = set()
    for c in sf.constraints:
        mentioned.add(c.var)
        if isinstance(c, EqFeat):
            mentioned.add(c.target)
    return mentioned - set(sf.bound) - {sf.root}


def consistent(term) -> bool:
    if isinstance(term, SolvedForm):
        return True
    return normalize("_x", term) is not None


# ---------------------------------------------------------------------------
# Entailment checking

_ROOT = "_x"


@dataclass(frozen=True)
class _View:
    constraints: frozenset
    evars: frozenset


def _constraint_view(operand, prefix: str) -> Optional[_View]:
    sf = operand if isinstance(operand, SolvedForm) else normalize(_ROOT, operand)
    if sf is None:
        return None
    solver = _Solver(prefix=prefix)
    if not solver.seed(sf, _ROOT):
        return None
    out = solver.project(_ROOT, {_ROOT} | _sf_free(sf), bound_prefix=prefix)
    return _View(out.constraints, frozenset(out.bound))


def _index(constraints):
    atoms = {}
    feats = defaultdict(dict)
    for c in constraints:
        if isinstance(c, EqAtom):
            atoms[c.var] = c.atom
        elif isinstance(c, EqFeat):
            feats[c.var][c.feature] = c.target
    return atoms, feats


def _simplify(context: frozenset, guard: frozenset, evars: set):
    """Exhaustively apply the three guard-simplification rules.

    Returns (residual guard constraints, residual existential vars, steps).
    Each rule application removes exactly one guard constraint, which bounds
    the number of steps by the initial guard size.
    """
    catoms, cfeats = _index(context)
    guard = set(guard)
    steps = 0
    budget = len(guard) * (len(context) + 1) + 1
    changed = True
    while changed:
        changed = False
        # Cancellation against an identical context constraint.
        for c in sorted(guard, key=_constraint_sort_key):
            if isinstance(c, EqAtom) and c.var not in evars and catoms.get(c.var) == c.atom:
                guard.remove(c)
                steps += 1
                changed = True
                break
            if (
                isinstance(c, EqFeat)
                and c.var not in evars
                and c.target not in evars
                and cfeats.get(c.var, {}).get(c.feature) == c.target
            ):
                guard.remove(c)
                steps += 1
                changed = True
                break
        if changed:
            continue
        # Substitute an existential guard variable by the context target.
        for c in sorted(guard, key=_constraint_sort_key):
            if isinstance(c, EqFeat) and c.var not in evars and c.target in evars:
                ctx_target = cfeats.get(c.var, {}).get(c.feature)
                if ctx_target is None:
                    continue
                old = c.target
                guard.remove(c)
                renamed = set()
                for g in guard:
                    if isinstance(g, EqAtom) and g.var == old:
                        g = EqAtom(ctx_target, g.atom)
                    elif isinstance(g, EqTop) and g.var == old:
                        g = EqTop(ctx_target)
                    elif isinstance(g, EqFeat) and (g.var == old or g.target == old):
                        g = EqFeat(
                            ctx_target if g.var == old else g.var,
                            g.feature,
                            ctx_target if g.target == old else g.target,
                        )
                    renamed.add(g)
                guard = renamed
                evars = evars - {old}
                steps += 1
                changed = True
                break
        assert steps <= budget, "guard simplification exceeded its step bound"
    return guard, evars, steps


def entail_check(left, right) -> Verdict:
    """Three-way entailment between consistent feature constraints.

    Raises ValueError if either operand is inconsistent on its own.
    """
    ctx = _constraint_view(left, "_c")
    if ctx is None:
        raise ValueError("left operand of entailment is inconsistent")
    grd = _constraint_view(right, "_g")
    if grd is None:
        raise ValueError("right operand of entailment is inconsistent")
    catoms, cfeats = _index(ctx.constraints)
    residual, evars, _steps = _simplify(ctx.constraints, grd.constraints, set(grd.evars))

    if all(isinstance(c, EqTop) for c in residual):
        return Verdict.ENTAILED
    for c in sorted(residual, key=_constraint_sort_key):
        if isinstance(c, EqTop) or c.var in evars:
            continue
        if isinstance(c, EqAtom):
            ctx_atom = catoms.get(c.var)
            if ctx_atom is not None and ctx_atom != c.atom:
                return Verdict.DISENTAILED
            if cfeats.get(c.var):
                return Verdict.DISENTAILED
        elif isinstance(c, EqFeat) and catoms.get(c.var) is not None:
            return Verdict.DISENTAILED
    return Verdict.BLOCKED


def simulation_entails(left, right) -> bool:
    """Independent oracle: does the right term's canonical graph map into
    the left one's, preserving the root, features, and atoms?"""
    ctx = _constraint_view(left, "_c")
    if ctx is None:
        raise ValueError("left operand of entailment is inconsistent")
    grd = _constraint_view(right, "_g")
    if grd is None:
        raise ValueError("right operand of entailment is inconsistent")
    catoms, cfeats = _index(ctx.constraints)
    gatoms, gfeats = _index(grd.constraints)
    gvars = {c.var for c in grd.constraints}
    for c in grd.constraints:
        if isinstance(c, EqFeat):
            gvars.add(c.target)

    image = {v: v for v in gvars if v not in grd.evars}
    queue = deque(sorted(image))
    processed = set()
    while queue:
        u = queue.popleft()
        if u in processed:
            continue
        processed.add(u)
        cu = image[u]
        atom = gatoms.get(u)
        if atom is not None and catoms.get(cu) != atom:
            return False
        for f in sorted(gfeats.get(u, {})):
            w = gfeats[u][f]
            cw = cfeats.get(cu, {}).get(f)
            if cw is None:
                return False
            if w in image:
                if image[w] != cw:
                    return False
            else:
                image[w] = cw
                queue.append(w)
    for v in gvars - processed:
        if gatoms.get(v) is not None or gfeats.get(v):
            return False
    return True


# ---------------------------------------------------------------------------
# Lattice operations


def meet(left, right) -> Optional[SolvedForm]:
    """Unification: the conjunction of both constraints, normalized; None
    when the conjunction clashes."""
    solver = _Solver(prefix="_m")
    frees = {_ROOT}
    for operand in (left, right):
        if isinstance(operand, SolvedForm):
            if not solver.seed(operand, _ROOT):
                return None
            frees |= _sf_free(operand)
        else:
            if not solver.assign(_ROOT, operand):
                return None
            frees |= free_vars(operand)
    return solver.project(_ROOT, frees)


def join(left, right) -> SolvedForm:
    """Generalization: the product graph keeping only constraints on which
    both sides agree; the least upper bound in the entailment preorder."""
    lsf = left if isinstance(left, SolvedForm) else normalize(_ROOT, left)
    rsf = right if isinstance(right, SolvedForm) else normalize(_ROOT, right)
    if lsf is None or rsf is None:
        raise ValueError("join of an inconsistent feature term")
    latoms, lfeats = _index(lsf.constraints)
    ratoms, rfeats = _index(rsf.constraints)

    names = {(lsf.root, rsf.root): _ROOT}
    bound = []
    counter = 0
    constraints = []
    queue = deque([(lsf.root, rsf.root)])
    done = set()
    while queue:
        pair = queue.popleft()
        if pair in done:
            continue
        done.add(pair)
        u, v = pair
        name = names[pair]
        la, ra = latoms.get(u), ratoms.get(v)
        emitted = False
        if la is not None and la == ra:
            constraints.append(EqAtom(name, la))
            emitted = True
        shared = sorted(set(lfeats.get(u, {})) & set(rfeats.get(v, {})))
        for f in shared:
            tpair = (lfeats[u][f], rfeats[v][f])
            tname = names.get(tpair)
            if tname is None:
                tname = f"V{counter}"
                counter += 1
                names[tpair] = tname
                bound.append(tname)
                queue.append(tpair)
            constraints.append(EqFeat(name, f, tname))
            emitted = True
        if not emitted:
            constraints.append(EqTop(name))
    return SolvedForm(_ROOT, tuple(bound), frozenset(constraints))


# ---------------------------------------------------------------------------
# Parsing


_FL_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<op>[:&()])
    """,
    re.X,
)


def _fl_tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _FL_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            kind = m.lastgroup if m.lastgroup == "ident" else m.group()
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


def parse_feature_term(text: str):
    """Concrete syntax: ``f:phi``, ``&``, ``top``, ``bot``,
    ``exists X (phi)``; leading capitals are variables."""
    tokens = _fl_tokenize(text)
    term, i = _fl_parse_conj(tokens, 0, text)
    if i != len(tokens):
        raise ParseError(f"trailing input {tokens[i][1]!r}", text, tokens[i][2])
    return term


def _fl_parse_conj(tokens, i, text):
    term, i = _fl_parse_item(tokens, i, text)
    while i < len(tokens) and tokens[i][0] == "&":
        right, i = _fl_parse_item(tokens, i + 1, text)
        term = FConj(term, right)
    return term, i


def _fl_parse_item(tokens, i, text):
    if i >= len(tokens):
        raise ParseError("unexpected end of feature term", text, len(text))
    kind, tok, pos = tokens[i]
    if kind == "(":
        term, i = _fl_parse_conj(tokens, i + 1, text)
        if i >= len(tokens) or tokens[i][0] != ")":
            raise ParseError("missing ')'", text, pos)
        return term, i + 1
    if kind != "ident":
        raise ParseError(f"unexpected token {tok!r}", text, pos)
    if tok == "top":
        return TOP, i + 1
    if tok == "bot":
        return BOT, i + 1
    if tok == "exists":
        if i + 1 >= len(tokens) or tokens[i + 1][0] != "ident" or not tokens[i + 1][1][0].isupper():
            raise ParseError("variable expected after 'exists'", text, pos)
        var = tokens[i + 1][1]
        if i + 2 >= len(tokens) or tokens[i + 2][0] != "(":
            raise ParseError("'(' expected after 'exists' variable", text, pos)
        body, i = _fl_parse_conj(tokens, i + 3, text)
        if i >= len(tokens) or tokens[i][0] != ")":
            raise ParseError("missing ')' closing 'exists'", text, pos)
        return FExists(var, body), i + 1
    if tok[0].isupper():
        return FVar(tok), i + 1
    if i + 1 < len(tokens) and tokens[i + 1][0] == ":":
        value, j = _fl_parse_item(tokens, i + 2, text)
        return FFeat(tok, value), j
    return FAtom(tok), i + 1


# ---------------------------------------------------------------------------
# BaseLogic adapter


class FeatureLogic(BaseLogic):
    """Feature logic as a base logic.  Payloads are feature terms as
    written in grammar files; lattice results are solved forms."""

    name = "feature"

    def parse(self, text: str):
        return parse_feature_term(text)

    def render(self, payload) -> str:
        return str(payload)

    def entails(self, left, right) -> Verdict:
        return entail_check(left, right)

    def consistent(self, payload) -> bool:
        return consistent(payload)

    def meet(self, left, right):
        return meet(left, right)

    def join(self, left, right):
        return join(left, right)
