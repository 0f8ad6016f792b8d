"""Three-step random-walk scoring (P3alpha) with an item-popularity penalty (RP3beta)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from .errors import UnknownUser
from .graph import InteractionGraph


@dataclass(frozen=True)
class WalkParams:
    alpha: float = 1.0
    beta: float = 0.6

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")


class ScoredItem(NamedTuple):
    item: int
    score: float


def _check_user(graph: InteractionGraph, user: int) -> int:
    if not isinstance(user, (int, np.integer)) or not 0 <= user < graph.num_users:
        raise UnknownUser(f"unknown user index {user!r}")
    return int(user)


def p3_scores(graph: InteractionGraph, user: int, alpha: float = 1.0) -> np.ndarray:
    """Sum over user -> item -> user -> item paths of the product of edge weights.

    A step leaving a node of degree ``d`` has weight ``(1/d)**alpha``.
    Weights are not renormalized after the exponent.
    """
    u = _check_user(graph, user)
    wu = np.power(graph.user_degree.astype(np.float64), -alpha)
    wi = np.power(graph.item_degree.astype(np.float64), -alpha)

    R, Rt = graph.incidence, graph.incidence_t
    # step 1: mass on the user's items
    first = graph.user_items(u)
    m_items = np.zeros(graph.num_items)
    m_items[first] = wu[u]
    # step 2: back to users
    m_users = R @ (m_items * wi)
    # step 3: out to items
    return Rt @ (m_users * wu)


def rp3b_scores(graph: InteractionGraph, user: int, params: WalkParams = WalkParams()) -> np.ndarray:
    """P3alpha scores divided by ``item_degree ** beta``."""
    s = p3_scores(graph, user, params.alpha)
    if params.beta == 0:
        return s
    return s / np.power(graph.item_degree.astype(np.float64), params.beta)


def rank_scores(scores: np.ndarray, n: int, exclude=None) -> List[ScoredItem]:
    """Top-``n`` positive entries, descending score, ascending index on ties."""
    if n <= 0:
        return []
    scores = np.asarray(scores, dtype=np.float64)
    mask = scores > 0
    if exclude is not None and len(exclude):
        mask[np.asarray(exclude)] = False
    cand = np.flatnonzero(mask)
    # lexsort: last key is primary
    order = np.lexsort((cand, -scores[cand]))
    top = cand[order[:n]]
    return [ScoredItem(int(i), float(scores[i])) for i in top]


def recommend_topn(
    graph: InteractionGraph,
    user: int,
    params: WalkParams = WalkParams(),
    n: int = 10,
    exclude_seen: bool = True,
) -> List[ScoredItem]:
    if n < 0:
        raise ValueError("n must be >= 0")
    scores = rp3b_scores(graph, user, params)
    seen = graph.user_items(user) if exclude_seen else None
    return rank_scores(scores, n, seen)
