"""corefkit: crowd coreference annotation toolkit.

CoNLL-U ingestion, automatic mention detection over dependency trees,
passage splitting, multi-annotator collection (file store + HTTP service),
vote-threshold aggregation and B3 agreement scoring.
"""

from .aggregation import (
    AggregateClustering, AggregationConfig, VoteMatrix, aggregate,
    aggregate_annotations, count_votes,
)
from .conllu import parse_conllu, to_conllu
from .corpus import Corpus
from .detector_eval import DetectorEval, eval_detector
from .mentions import dedupe_and_merge, detect_mentions, expand_span, head_of
from .model import (
    Clustering, Document, Mention, MentionSet, Passage, Sentence, Token,
)
from .passages import SplitConfig, split_passages
from .scoring import B3Score, IAAReport, ScreeningResult, b3, pairwise_iaa, screening_pass
from .store import AnnotationStore
from .tutorial import TutorialScript, TutorialStep, example_script

__version__ = "0.1.0"

__all__ = [
    "AggregateClustering", "AggregationConfig", "AnnotationStore", "B3Score",
    "Clustering", "Corpus", "DetectorEval", "Document", "IAAReport",
    "Mention", "MentionSet", "Passage", "ScreeningResult", "Sentence",
    "SplitConfig", "Token", "TutorialScript", "TutorialStep", "VoteMatrix",
    "aggregate", "aggregate_annotations", "b3", "count_votes",
    "dedupe_and_merge", "detect_mentions", "eval_detector", "example_script",
    "expand_span", "head_of", "pairwise_iaa", "parse_conllu", "screening_pass",
    "split_passages", "to_conllu",
]
