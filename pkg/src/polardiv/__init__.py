"""Ideology-aware diversification of random-walk news recommendations."""

from .diversify import DiversifyParams, acceptability_filter, diversify_recommend, greedy_rerank
from .evaluation import MetricsReport, SplitSpec, evaluate, holdout_split
from .graph import InteractionEvent, InteractionGraph, build_graph, parse_events, prune
from .ideology import AnchorSet, FitOptions, IdeologyModel, fit_ideology, fold_in_item, fold_in_user
from .recsys import WalkParams, p3_scores, recommend_topn, rp3b_scores
from .synthgen import SynthParams, generate

__version__ = "0.1.0"
