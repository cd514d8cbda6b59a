"""Dataset construction and scoring for incremental (low-latency) NLU."""

__version__ = "0.1.0"

from incnlu.corpus import AnnotatedUtterance, CorpusError, SlotLexicon, parse_iob_tsv, slot_lexicon
from incnlu.evaluation import Hypothesis, evaluate_confidence, evaluate_partial
from incnlu.incremental import IncrementalSeries, align_asr_partials, generate_prefixes, select_prefix
from incnlu.metrics import CorpusScores, co_mc_scores, intents_accuracy, true_positives
from incnlu.noise import NoiseConfig, Vocabulary, acoustic_similarity, build_vocabulary, inject_noise
from incnlu.seq2seq import ClassSequence, Intent, Param, iob_to_target, parse_target

__all__ = [
    "AnnotatedUtterance", "ClassSequence", "CorpusError", "CorpusScores", "Hypothesis",
    "IncrementalSeries", "Intent", "NoiseConfig", "Param", "SlotLexicon", "Vocabulary",
    "acoustic_similarity", "align_asr_partials", "build_vocabulary", "co_mc_scores",
    "evaluate_confidence", "evaluate_partial", "generate_prefixes", "inject_noise",
    "intents_accuracy", "iob_to_target", "parse_iob_tsv", "parse_target", "select_prefix",
    "slot_lexicon", "true_positives",
]
