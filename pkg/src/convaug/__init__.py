"""Few-shot augmentation of task-oriented dialogue corpora.

From a handful of annotated seed dialogues, convaug builds delexicalized
turn-pair templates keyed by their dialogue function, composes new dialogue
skeletons by constraint-checked breadth-first tree growth, and realizes them
into schema-identical synthetic dialogues with regenerated belief states.
"""

from .bank import (
    NULL_MARKER,
    FunctionKey,
    RejectionRecord,
    TemplateBank,
    TurnPairTemplate,
    bank_to_json,
    build_bank,
    make_templates,
    successors,
    template_id,
)
from .compose import (
    EQUALITY,
    SUPERSET,
    DialogueTemplate,
    GrowthLimits,
    TemplateTree,
    TreeNode,
    check_link,
    extract_dialogue_templates,
    grow_tree,
    tree_to_records,
)
from .corpus import (
    RESERVED_VALUES,
    BeliefState,
    Corpus,
    Dialogue,
    RawTurn,
    SlotLabel,
    SlotValue,
    TurnPair,
    ValidationReport,
    Violation,
    corpus_to_json,
    dialogue_to_json,
    load_corpus,
    normalize_text,
    pair_turns,
    sample_shots,
    validate_dialogue,
    write_corpus,
)
from .delex import (
    OVERLAP_AMBIGUITY,
    VALUE_COLLISION,
    CategoricalPolicy,
    CollisionReport,
    DelexPair,
    Rejection,
    SlotValueDict,
    Substitution,
    classify_slots,
    delexicalize_pair,
    detect_collision,
    find_token_spans,
    harvest_values,
    placeholder,
)
from .errors import (
    AlternationError,
    ConvaugError,
    EmptyBankError,
    InsufficientDataError,
    InvariantError,
    NoCompleteDialogueError,
    ParseError,
    ResidualPlaceholderError,
    SchemaError,
    UncoverableLabelError,
)
from .realize import (
    EXHAUSTIVE,
    SAMPLED,
    Assignment,
    GenerationResult,
    RealizationBudget,
    SyntheticDialogue,
    SyntheticProvenance,
    content_key,
    enumerate_assignments,
    fillable_labels,
    generate,
    realize,
)

__version__ = "0.1.0"
