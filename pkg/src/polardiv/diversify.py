"""Ideology-aware re-ranking of walk candidates.

Candidates far from the user (beyond the acceptability window) are held
back; the rest are picked greedily, trading normalized walk score against
the smallest ideological distance to what has already been picked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import EmptyPool
from .graph import InteractionGraph
from .ideology import IdeologyModel, item_positions_for
from .recsys import WalkParams, recommend_topn


@dataclass(frozen=True)
class DiversifyParams:
    lam: float = 0.5
    tau: float = 2.0
    pool_size: int = 100
    list_size: int = 10

    def __post_init__(self):
        if not 0 <= self.lam <= 1:
            raise ValueError("lambda must lie in [0, 1]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 1 <= self.list_size <= self.pool_size:
            raise ValueError("need 1 <= list_size <= pool_size")


class Candidate(NamedTuple):
    item: int
    score: float
    phi: float


class Recommendation(NamedTuple):
    item: int
    score: float
    phi: float
    backfilled: bool = False


def acceptability_filter(
    candidates: Sequence[Candidate], theta_u: float, tau: float
) -> Tuple[List[Candidate], List[Candidate]]:
    """Split candidates by the closed window ``|phi - theta_u| <= tau``, keeping order."""
    acceptable, rejected = [], []
    for c in candidates:
        if abs(c.phi - theta_u) <= tau:
            acceptable.append(c)
        else:
            rejected.append(c)
    return acceptable, rejected


def greedy_rerank(pool: Sequence[Candidate], params: DiversifyParams) -> List[Candidate]:
    """Select up to ``params.list_size`` candidates by marginal gain.

    The gain of candidate ``i`` given the selection ``S`` is
    ``lam * s_i + (1 - lam) * min_{j in S} |phi_i - phi_j|`` where ``s`` is
    the walk score min-max normalized over the pool (1 everywhere if the
    pool is flat). The first pick is the best-scored candidate. Ties go to
    the lowest item index.
    """
    if not pool:
        raise EmptyPool("cannot re-rank an empty pool")
    # sorted by item index so argmax returns the lowest index among ties
    pool = sorted(pool, key=lambda c: c.item)
    scores = np.array([c.score for c in pool], dtype=np.float64)
    phi = np.array([c.phi for c in pool], dtype=np.float64)
    lo, hi = scores.min(), scores.max()
    if hi > lo:
        s_norm = (scores - lo) / (hi - lo)
    else:
        s_norm = np.ones_like(scores)

    lam = params.lam
    n_pick = min(params.list_size, len(pool))
    available = np.ones(len(pool), dtype=bool)
    min_dist = np.full(len(pool), np.inf)
    picked = []
    for step in range(n_pick):
        if step == 0:
            gain = s_norm.copy()
        else:
            gain = lam * s_norm + (1 - lam) * min_dist
        gain[~available] = -np.inf
        k = int(np.argmax(gain))
        picked.append(pool[k])
        available[k] = False
        np.minimum(min_dist, np.abs(phi - phi[k]), out=min_dist)
    return picked


def diversify_recommend(
    graph: InteractionGraph,
    model: IdeologyModel,
    user: str,
    walk_params: WalkParams = WalkParams(),
    div_params: DiversifyParams = DiversifyParams(),
    item_phi: np.ndarray = None,
) -> List[Recommendation]:
    """Walk candidates, windowed and re-ranked for ideological spread.

    Takes the top ``pool_size`` unseen items by RP3beta score, keeps those
    inside the user's window, re-ranks them with :func:`greedy_rerank`, and
    tops the list up from the out-of-window candidates by descending score
    when fewer than ``list_size`` were acceptable. Top-up items carry
    ``backfilled=True``.

    ``item_phi`` may pass precomputed positions indexed by graph item index
    (see :func:`polardiv.ideology.item_positions_for`). Items without a
    position never enter the window.
    """
    u = graph.user(user)
    theta_u = model.user_position(user)
    if item_phi is None:
        item_phi = item_positions_for(graph, model)

    top = recommend_topn(graph, u, walk_params, div_params.pool_size, exclude_seen=True)
    if not top:
        return []
    cands = [Candidate(s.item, s.score, float(item_phi[s.item])) for s in top]
    # NaN positions compare False and land in `rejected`
    acceptable, rejected = acceptability_filter(cands, theta_u, div_params.tau)

    out = []
    if acceptable:
        out = [Recommendation(c.item, c.score, c.phi) for c in greedy_rerank(acceptable, div_params)]
    missing = div_params.list_size - len(out)
    if missing > 0:
        rejected = sorted(rejected, key=lambda c: (-c.score, c.item))
        out.extend(Recommendation(c.item, c.score, c.phi, True) for c in rejected[:missing])
    return out
