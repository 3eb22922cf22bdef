"""Sequent proof search and grammar tools for Lambek calculi with subtyped
basic categories: pluggable base logics, a feature-constraint solver,
coordination, the context-free compile-out, and double-layer unification."""

from .baselogic import (
    BaseLogic,
    IdentityLogic,
    PAnd,
    PAtom,
    POr,
    PosetLogic,
    PropLogic,
    Verdict,
)
from .featurelogic import (
    BOT,
    FAtom,
    FConj,
    FExists,
    FFeat,
    FTop,
    FVar,
    FeatureLogic,
    SolvedForm,
    TOP,
    entail_check,
    join,
    meet,
    normalize,
    parse_feature_term,
    simulation_entails,
)
from .grammar import (
    CompiledFamily,
    Grammar,
    GrammarError,
    Lexicon,
    MembershipReport,
    OracleError,
    compile_out,
    compile_out_check,
    coordinate,
    lemma12_oracle,
    load_grammar,
    loads_grammar,
    membership,
    substitution_set,
    super_minus,
    super_plus,
    type_join,
    type_meet,
)
from .layered import (
    AnnotatedFormula,
    ConstrainedEntry,
    Environment,
    LayeredBasic,
    embed,
    erase_proof,
    instantiate,
    plain_entry,
    prove_layered,
    query_env,
)
from .prover import (
    AdmissibilityError,
    Proof,
    ProofError,
    RuleName,
    SearchConfig,
    check_proof,
    check_strengthen_left,
    check_subtype_derivable,
    check_weaken_right,
    nonaxiom_count,
    proof_from_json,
    proof_to_json,
    proof_to_text,
    prove,
    prove_with_cut,
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
    canonicalize,
    parse_formula,
    parse_gterm,
    parse_sequent,
    polarity_of,
    render_formula,
    render_gterm,
    render_sequent,
    subformula_closure,
    subtype,
)

__version__ = "0.1.0"
