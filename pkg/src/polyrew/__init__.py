"""String rewriting over monoid presentations: completions, coherent
presentations, and Garside-family presentations from finite data."""

from .core import (
    Generator,
    MonoidTable,
    NoUnit,
    PolygraphError,
    RedexMismatch,
    RewritePath,
    RewriteStep,
    Rule,
    TableNotAssociative,
    ThreeCell,
    ThreeOnePolygraph,
    TwoPolygraph,
    ValidationError,
    Word,
    apply_step,
    cancel_inverse_pairs,
    invert_path,
    paths_equal,
    replay_path,
    std2,
    std3,
)
from .engine import (
    BudgetExceeded,
    CellMove,
    CollapsibleCell,
    CollapsiblePart,
    CollapsibleRule,
    CollapsibleSphere,
    Comparison,
    CriticalBranching,
    ExchangeMove,
    InvalidOrderSpec,
    NotCollapsible,
    NotLocallyConfluent,
    NotParallel,
    OrderSpec,
    OrientationFailure,
    StepBudgetExceeded,
    SubstitutionOutOfScope,
    ThreeSphere,
    TripleBranching,
    check_sphere,
    compare_words,
    critical_branchings,
    deglex,
    divlex,
    greedy_collapse_rules,
    homotopical_completion,
    homotopical_reduce,
    join_branching,
    knuth_bendix,
    normalize,
    squier,
    triple_branchings,
)
from .garside import (
    AmbiguousClassification,
    DatumReport,
    FamilyCell,
    GarsideDatum,
    MismatchWithGar3,
    NormalizationFailure,
    NotADivisor,
    ReductionReport,
    SNormalWord,
    SphereCheckFailed,
    UnclassifiedBranching,
    complement,
    divlex_order,
    family_cells,
    gar2,
    gar3,
    head2,
    left_divides,
    reduce_to_gar3,
    right_mcms,
    s_normalize,
    underline_gar2,
    underline_gar3,
    validate_datum,
)
from .catalog import (
    BadParameter,
    CATALOG,
    CatalogEntry,
    atilde2_datum,
    braid_simple_datum,
    catalog_data,
    free_abelian_datum,
    free_abelian_presentation,
    klein_bottle,
)
