"""Study-planning rules mined from exam-attempt event logs."""

from .event_log import EventLog, StudyPath, Trace, build_study_path, build_traces, parse_event_log
from .features import FeatureMatrix, assemble_matrix, parse_selector
from .labels import LabelSpec, select_cohort
from .order_graph import IndexKind, build_lifecycle_partial_order, build_partial_order, path_length
from .rules import extract_rules, render_rule
from .tree import DecisionTree, Hyperparams, fit

__version__ = "0.1.0"

__all__ = [
    "EventLog", "StudyPath", "Trace", "build_study_path", "build_traces", "parse_event_log",
    "FeatureMatrix", "assemble_matrix", "parse_selector",
    "LabelSpec", "select_cohort",
    "IndexKind", "build_lifecycle_partial_order", "build_partial_order", "path_length",
    "extract_rules", "render_rule",
    "DecisionTree", "Hyperparams", "fit",
]
