"""framegen: expand a frame-semantic lexicon with generated annotated sentences.

The pipeline: parse a FrameNet-style release, substitute unannotated lexical
units into their sisters' annotated sentences, mask the frame elements likely
to turn inconsistent, overgenerate replacement spans through a generator
backend, and keep only candidates whose every regenerated span passes a
strict FE-type check.
"""

from .lexicon import (
    AnnotatedSentence,
    Coreness,
    Corpus,
    CoverageReport,
    FeSpan,
    Frame,
    FrameElement,
    LexicalUnit,
    Lexicon,
    LexiconError,
    Pos,
    Source,
    Span,
    Split,
    coverage_report,
    explode_fulltext,
    pos_stats,
    read_corpus_jsonl,
    split_sizes,
    to_record,
    write_corpus_jsonl,
)
from .release import ReleaseError, SplitConfig, load_release
from .relations import (
    FeRelationEdge,
    FrameRelationEdge,
    RelationGraph,
    RelationType,
)
from .expand import (
    CandidateConfig,
    CandidateSelector,
    ConditioningMode,
    MaskedInstance,
    ReplacementInstance,
    build_masked,
    replace_lu,
    select_candidate_fes,
)
from .genfilter import (
    ClassifierRequest,
    Decoding,
    FilterVerdict,
    GenerationCandidate,
    GeneratorRequest,
    build_prompt,
    build_request,
    fe_fidelity,
    overgenerate,
    parse_fills,
    splice,
    strict_filter,
)
from .metrics import (
    MetricsReport,
    assemble_report,
    emit_review_sheet,
    perplexity,
    rouge,
    self_bleu,
)
from .srl import (
    AugmentationPlan,
    LuScore,
    Manifest,
    SrlPrediction,
    emit_training_data,
    plan_inverse_f1,
    plan_low_resource,
    plan_non_oracle_removal,
    score_srl,
    select_oracle_lus,
)
from .pipeline import RunConfig, run_pipeline

__version__ = "0.1.0"
