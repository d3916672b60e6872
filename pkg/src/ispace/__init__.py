"""Information-space personalization toolkit."""

from .core import (
    Arm,
    Assignment,
    Chain,
    Content,
    DslSyntaxError,
    DuplicateArmError,
    DuplicateContentRefError,
    EmptyMapError,
    InconsistentAssignmentError,
    LabelCollisionError,
    MutexGroup,
    Program,
    Seq,
    SpaceError,
    Test,
    enumerate_paths,
    ingest_sitemap,
    parse,
    program_from_json,
    program_to_json,
    resolve_given,
    serialize,
)
from .specialize import (
    BudgetExceededError,
    SpecializationResult,
    is_complete,
    propagate_mutex,
    specialize,
    specializes_to,
)
from .factorize import (
    Activity,
    CoverageReport,
    FactorizationVerdict,
    Verdict,
    classify,
    evaluate_coverage,
    load_activities,
)
from .ebg import (
    Atom,
    Const,
    DepthExceededError,
    ExplainAllResult,
    Fact,
    FactLeaf,
    FactSet,
    MalformedTreeError,
    Rule,
    RuleNode,
    Theory,
    UnknownPredicateError,
    Var,
    explain,
    explain_all,
    parse_facts,
    parse_goal,
    parse_theory,
    unused_facts,
    verify_explanation,
)
from .operationalize import (
    AssessmentReport,
    ContentBinding,
    FrontierMissError,
    FrontierSpec,
    OperationalizedExplanation,
    UnboundSubgoalError,
    UnreachableBindingError,
    assess_operationality,
    cut,
    generalize,
    generate_model,
)

__version__ = "0.1.0"
