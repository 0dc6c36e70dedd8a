"""orrmine: corpus engineering for ORR-catalyst literature mining.

Pipeline pieces: Brat standoff I/O, rule-based default tagging, conversion to
a token-indexed model exchange format, seeded dataset splitting, micro P/R/F1
scoring, and structured CSV / DOT graph output, all behind one CLI.
"""

from .brat import BratParseError, parse_ann, read_pair, walk_pairs, write_ann
from .integrate import (
    AlignmentError,
    CorpusStats,
    ModelDoc,
    SplitConfig,
    corpus_stats,
    filter_relations,
    ingest_predictions,
    split_document,
    structure_dataset,
    to_model_doc,
)
from .model import (
    ATTRIBUTE_TYPES,
    MATERIAL_TYPES,
    AnnotationSet,
    Document,
    EntityMention,
    EntityType,
    Finding,
    RelationMention,
    RelationType,
    SchemaError,
    Section,
    ValidationReport,
    validate,
)
from .scoring import ScoreCounts, ScoreReport, compare_sources, match_ner, match_re, score_pair
from .segment import segment
from .selector import SelectorQuery, filter_articles, rank_articles
from .structure import build_rows, export_graph, merge_equivalents, write_csv
from .tagger import Gazetteer, MatcherSet, ParserSpec, compile_spec, tag_document

__version__ = "0.1.0"

__all__ = [
    "ATTRIBUTE_TYPES",
    "MATERIAL_TYPES",
    "AlignmentError",
    "AnnotationSet",
    "BratParseError",
    "CorpusStats",
    "Document",
    "EntityMention",
    "EntityType",
    "Finding",
    "Gazetteer",
    "MatcherSet",
    "ModelDoc",
    "ParserSpec",
    "RelationMention",
    "RelationType",
    "SchemaError",
    "ScoreCounts",
    "ScoreReport",
    "Section",
    "SelectorQuery",
    "SplitConfig",
    "ValidationReport",
    "build_rows",
    "compare_sources",
    "compile_spec",
    "corpus_stats",
    "export_graph",
    "filter_articles",
    "filter_relations",
    "ingest_predictions",
    "match_ner",
    "match_re",
    "merge_equivalents",
    "parse_ann",
    "rank_articles",
    "read_pair",
    "score_pair",
    "segment",
    "split_document",
    "structure_dataset",
    "tag_document",
    "to_model_doc",
    "validate",
    "walk_pairs",
    "write_ann",
    "write_csv",
]
