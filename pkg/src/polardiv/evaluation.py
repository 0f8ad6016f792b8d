"""Holdout splitting and the accuracy / diversity metric suite."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .diversify import DiversifyParams, diversify_recommend
from .errors import EmptyHoldout, EmptyList, NoEvaluableUsers, TooFewItems
from .graph import InteractionEvent, InteractionGraph
from .ideology import IdeologyModel, item_positions_for
from .recsys import WalkParams, recommend_topn


@dataclass(frozen=True)
class SplitSpec:
    k: int = 3
    seed: int = 11

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    ndcg: float
    list_spread: float
    ild: float
    displacement_abs: float
    coverage: float
    gini: float
    n_users_evaluated: int
    n_users_with_lists: int
    n_items_unpositioned: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def holdout_split(
    events: Sequence[InteractionEvent], spec: SplitSpec
) -> Tuple[List[InteractionEvent], List[Tuple[str, str]]]:
    """Hold out ``spec.k`` distinct items per user who has more than ``k``.

    Users are visited in order of first appearance and each draws from one
    ``numpy.random.default_rng(spec.seed)`` stream, so the split depends
    only on the event order and the seed. Returned train events keep their
    original order; duplicates of a held-out pair are all removed.
    """
    if not events:
        raise NoEvaluableUsers("no events to split")
    per_user: Dict[str, List[str]] = {}
    seen = set()
    for ev in events:
        if (ev.user, ev.item) in seen:
            continue
        seen.add((ev.user, ev.item))
        per_user.setdefault(ev.user, []).append(ev.item)

    rng = np.random.default_rng(spec.seed)
    test: List[Tuple[str, str]] = []
    for user, items in per_user.items():
        if len(items) <= spec.k:
            continue
        pick = rng.choice(len(items), size=spec.k, replace=False)
        test.extend((user, items[j]) for j in sorted(pick.tolist()))
    if not test:
        raise NoEvaluableUsers(f"no user has more than {spec.k} distinct items")
    held = set(test)
    train = [ev for ev in events if (ev.user, ev.item) not in held]
    return train, test


def precision_at_n(rec_list: Sequence, holdout: Iterable, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    holdout = set(holdout)
    return sum(1 for r in rec_list[:n] if r in holdout) / n


def recall_at_n(rec_list: Sequence, holdout: Iterable, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    holdout = set(holdout)
    if not holdout:
        raise EmptyHoldout("recall needs a non-empty holdout")
    return sum(1 for r in rec_list[:n] if r in holdout) / len(holdout)


def ndcg_at_n(rec_list: Sequence, holdout: Iterable, n: int) -> float:
    """Binary-relevance NDCG; rank 1 has discount ``1/log2(2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    holdout = set(holdout)
    if not holdout:
        raise EmptyHoldout("ndcg needs a non-empty holdout")
    dcg = sum(1.0 / math.log2(rank + 1) for rank, r in enumerate(rec_list[:n], start=1) if r in holdout)
    idcg = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(len(holdout), n) + 1))
    return dcg / idcg


def list_spread(positions: Sequence[float]) -> float:
    """Population standard deviation of list positions (0 for a singleton)."""
    arr = np.asarray(positions, dtype=np.float64)
    if arr.size == 0:
        raise TooFewItems("spread needs at least one position")
    return float(arr.std())


def intra_list_distance(positions: Sequence[float]) -> float:
    """Mean absolute position difference over unordered pairs."""
    arr = np.asarray(positions, dtype=np.float64)
    m = arr.size
    if m < 2:
        raise TooFewItems("intra-list distance needs at least two positions")
    # sum over i<j of |a_i - a_j| from sorted values: sum_k (2k - m + 1) a_(k)
    a = np.sort(arr)
    total = float(np.dot(2 * np.arange(m) - m + 1, a))
    return total / (m * (m - 1) / 2)


def displacement(theta_u: float, list_positions: Sequence[float]) -> float:
    """Signed offset of the list's mean position from the user's."""
    arr = np.asarray(list_positions, dtype=np.float64)
    if arr.size == 0:
        raise EmptyList("displacement needs a non-empty list")
    return float(arr.mean() - theta_u)


def coverage(all_rec_lists: Iterable[Sequence], catalog_size: int) -> float:
    if catalog_size < 1:
        raise ValueError("catalog_size must be >= 1")
    distinct = set()
    for lst in all_rec_lists:
        distinct.update(lst)
    return len(distinct) / catalog_size


def gini(counts: Sequence[float]) -> float:
    """Gini index of recommendation counts over the whole catalog."""
    x = np.sort(np.asarray(counts, dtype=np.float64))
    m = x.size
    total = x.sum()
    if m == 0 or total == 0:
        return 0.0
    i = np.arange(1, m + 1)
    return float(np.dot(2 * i - m - 1, x) / (m * total))


def evaluate(
    graph_train: InteractionGraph,
    model: IdeologyModel,
    test_pairs: Sequence[Tuple[str, str]],
    walk_params: WalkParams = WalkParams(),
    div_params: DiversifyParams = DiversifyParams(),
    use_diversifier: bool = True,
    n: int = 10,
) -> MetricsReport:
    """Score one recommender configuration against held-out pairs.

    Users with an empty list count as zero for accuracy and are left out
    of the list-diversity means. Items without a position (no fitted value
    and no positioned sharer) are left out of the diversity metrics and
    counted in ``n_items_unpositioned``.
    """
    holdout: Dict[str, set] = {}
    for user, item in test_pairs:
        holdout.setdefault(user, set()).add(item)
    users = [u for u in holdout if u in graph_train.user_index]
    if not users:
        raise NoEvaluableUsers("no held-out user is present in the training graph")
    users.sort(key=graph_train.user_index.__getitem__)

    item_phi = item_positions_for(graph_train, model)
    n_unpositioned = int(np.isnan(item_phi).sum())
    if use_diversifier:
        div_params = replace(div_params, list_size=n, pool_size=max(n, div_params.pool_size))

    prec, rec, nd = [], [], []
    spreads, ilds, disps = [], [], []
    counts = np.zeros(graph_train.num_items, dtype=np.int64)
    for user in users:
        if use_diversifier:
            lst = [r.item for r in diversify_recommend(graph_train, model, user, walk_params, div_params, item_phi)]
        else:
            u = graph_train.user_index[user]
            lst = [s.item for s in recommend_topn(graph_train, u, walk_params, n, exclude_seen=True)]
        counts[lst] += 1
        ext = [graph_train.item_ids[i] for i in lst]
        truth = holdout[user]
        prec.append(precision_at_n(ext, truth, n))
        rec.append(recall_at_n(ext, truth, n))
        nd.append(ndcg_at_n(ext, truth, n))
        if not lst:
            continue
        pos = item_phi[lst]
        pos = pos[~np.isnan(pos)]
        if pos.size == 0:
            continue
        spreads.append(list_spread(pos))
        if pos.size >= 2:
            ilds.append(intra_list_distance(pos))
        disps.append(abs(displacement(model.user_position(user), pos)))

    def mean(xs):
        return float(np.mean(xs)) if xs else 0.0

    return MetricsReport(
        precision=mean(prec),
        recall=mean(rec),
        ndcg=mean(nd),
        list_spread=mean(spreads),
        ild=mean(ilds),
        displacement_abs=mean(disps),
        coverage=coverage([np.flatnonzero(counts)], graph_train.num_items),
        gini=gini(counts),
        n_users_evaluated=len(users),
        n_users_with_lists=len(spreads),
        n_items_unpositioned=n_unpositioned,
    )
