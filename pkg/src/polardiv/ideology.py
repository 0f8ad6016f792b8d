"""One-dimensional ideological positions from the share graph.

Positions come from correspondence analysis of the binary incidence
matrix: the leading singular pair of the standardized residual matrix

    S = D_r^{-1/2} (P - r c^T) D_c^{-1/2},   P = R / n,  r = d_u / n,  c = d_i / n.

``S`` is never materialized. It is applied through the sparse incidence
matrix, so fitting costs O(n) per power-iteration step.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DataError,
    DegenerateDimension,
    DimensionMismatch,
    EmptySharerSet,
    NotConverged,
    UnknownAnchor,
    UnknownUser,
    ZeroDegreeNode,
    ZeroVariance,
)
from .graph import InteractionGraph

_log = logging.getLogger(__name__)

DEGENERATE_SIGMA = 1e-8


@dataclass(frozen=True)
class FitOptions:
    tol: float = 1e-12
    max_iter: int = 10000
    seed: int = 42

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class AnchorSet:
    """Users of known orientation; used only to fix the sign of the axis."""

    entries: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(u), int(s)) for u, s in self.entries))
        seen = set()
        for uid, sign in self.entries:
            if sign not in (-1, 1):
                raise DataError(f"anchor sign for {uid!r} must be -1 or 1, got {sign}")
            if uid in seen:
                raise DataError(f"duplicate anchor {uid!r}")
            seen.add(uid)
        signs = {s for _, s in self.entries}
        if signs != {-1, 1}:
            raise DataError("anchors need at least one +1 and one -1 entry")

    @classmethod
    def read_csv(cls, fp: IO[str]) -> "AnchorSet":
        reader = csv.reader(fp)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["user", "sign"]:
            raise DataError("anchor file must start with header 'user,sign'")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataError(f"anchor line {lineno}: expected 2 columns")
            try:
                sign = int(row[1])
            except ValueError:
                raise DataError(f"anchor line {lineno}: bad sign {row[1]!r}") from None
            entries.append((row[0].strip(), sign))
        return cls(tuple(entries))


@dataclass
class IdeologyModel:
    """Fitted positions on a common standardized axis.

    ``theta`` and ``phi`` are indexed like ``user_ids`` and ``item_ids``.
    ``mu`` and ``s`` are the affine map from standard coordinates:
    ``theta = (x - mu) / s`` and likewise for items.
    """

    user_ids: Tuple[str, ...]
    item_ids: Tuple[str, ...]
    theta: np.ndarray
    phi: np.ndarray
    sigma1: float
    mu: float
    s: float
    iterations: int = 0
    _user_pos: Dict[str, float] = field(init=False, repr=False, compare=False)
    _item_pos: Dict[str, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.user_ids = tuple(self.user_ids)
        self.item_ids = tuple(self.item_ids)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.phi = np.asarray(self.phi, dtype=np.float64)
        self._user_pos = dict(zip(self.user_ids, self.theta.tolist()))
        self._item_pos = dict(zip(self.item_ids, self.phi.tolist()))

    def user_position(self, user_id: str) -> float:
        try:
            return self._user_pos[user_id]
        except KeyError:
            raise UnknownUser(f"user {user_id!r} not in model") from None

    def item_position(self, item_id: str) -> Optional[float]:
        return self._item_pos.get(item_id)

    def has_user(self, user_id: str) -> bool:
        return user_id in self._user_pos

    def to_dict(self) -> dict:
        return {
            "sigma1": float(self.sigma1),
            "mu": float(self.mu),
            "s": float(self.s),
            "users": dict(zip(self.user_ids, self.theta.tolist())),
            "items": dict(zip(self.item_ids, self.phi.tolist())),
        }

    def dump(self, fp: IO[str]) -> None:
        json.dump(self.to_dict(), fp, indent=1)
        fp.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "IdeologyModel":
        try:
            users = d["users"]
            items = d["items"]
            return cls(
                user_ids=tuple(users),
                item_ids=tuple(items),
                theta=np.array([float(v) for v in users.values()]),
                phi=np.array([float(v) for v in items.values()]),
                sigma1=float(d["sigma1"]),
                mu=float(d["mu"]),
                s=float(d["s"]),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise DataError(f"invalid model file: {e}") from e

    @classmethod
    def load(cls, fp: IO[str]) -> "IdeologyModel":
        try:
            d = json.load(fp)
        except json.JSONDecodeError as e:
            raise DataError(f"invalid model file: {e}") from e
        return cls.from_dict(d)


def _margins(graph: InteractionGraph):
    if graph.user_degree.min(initial=1) == 0 or graph.item_degree.min(initial=1) == 0:
        raise ZeroDegreeNode("graph has zero-degree nodes; prune it first")
    n = float(graph.n)
    r = graph.user_degree / n
    c = graph.item_degree / n
    return n, r, c


def residual_apply(graph: InteractionGraph, x) -> np.ndarray:
    """Compute ``S @ x`` for an item-space vector ``x``."""
    n, r, c = _margins(graph)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (graph.num_items,):
        raise DimensionMismatch(f"expected item vector of length {graph.num_items}, got {x.shape}")
    z = x / np.sqrt(c)
    y = graph.incidence @ z / n - r * (c @ z)
    return y / np.sqrt(r)


def residual_apply_adjoint(graph: InteractionGraph, y) -> np.ndarray:
    """Compute ``S.T @ y`` for a user-space vector ``y``."""
    n, r, c = _margins(graph)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (graph.num_users,):
        raise DimensionMismatch(f"expected user vector of length {graph.num_users}, got {y.shape}")
    z = y / np.sqrt(r)
    x = graph.incidence_t @ z / n - c * (r @ z)
    return x / np.sqrt(c)


def leading_singular_triplet(graph: InteractionGraph, opts: FitOptions = FitOptions()):
    """Leading singular value and vectors of ``S`` by power iteration on ``S^T S``.

    The start vector is a standard normal draw from ``numpy.random.default_rng(seed)``
    (PCG64), normalized. Iteration stops once two successive estimates of
    sigma1 differ by less than ``opts.tol``.

    Returns
    -------
    sigma1 : float
    u1 : ndarray, unit norm, user space, equal to ``S v1 / sigma1``
    v1 : ndarray, unit norm, item space; its largest-magnitude entry is positive
    iterations : int
    """
    _margins(graph)
    if graph.num_users < 2 or graph.num_items < 2:
        raise DegenerateDimension("need at least two users and two items")

    rng = np.random.default_rng(opts.seed)
    v = rng.standard_normal(graph.num_items)
    v /= np.linalg.norm(v)

    sigma_prev = None
    for it in range(1, opts.max_iter + 1):
        Sv = residual_apply(graph, v)
        sigma = float(np.linalg.norm(Sv))
        if sigma < DEGENERATE_SIGMA:
            raise DegenerateDimension(f"leading singular value {sigma:.3g} is numerically zero")
        w = residual_apply_adjoint(graph, Sv / sigma)
        v = w / np.linalg.norm(w)
        if sigma_prev is not None and abs(sigma - sigma_prev) < opts.tol:
            break
        sigma_prev = sigma
    else:
        raise NotConverged(opts.max_iter)

    # sign convention: largest |v1| entry positive, first index on ties
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    Sv = residual_apply(graph, v)
    sigma = float(np.linalg.norm(Sv))
    if sigma < DEGENERATE_SIGMA:
        raise DegenerateDimension(f"leading singular value {sigma:.3g} is numerically zero")
    u = Sv / sigma
    _log.debug("power iteration converged in %d steps, sigma1=%.12g", it, sigma)
    return sigma, u, v, it


def fit_ideology(
    graph: InteractionGraph,
    anchors: Optional[AnchorSet] = None,
    opts: FitOptions = FitOptions(),
) -> IdeologyModel:
    """Fit user and item positions on one standardized axis.

    Standard coordinates ``u1/sqrt(r)`` and ``v1/sqrt(c)`` are optionally
    sign-flipped so +1 anchors sit at or above -1 anchors, then both sides
    go through the same affine map that gives users mean 0 and variance 1.
    """
    anchor_idx = []
    if anchors is not None:
        for uid, sign in anchors.entries:
            if uid not in graph.user_index:
                raise UnknownAnchor(f"anchor {uid!r} not in graph")
            anchor_idx.append((graph.user_index[uid], sign))

    sigma, u1, v1, iters = leading_singular_triplet(graph, opts)
    _, r, c = _margins(graph)
    x = u1 / np.sqrt(r)
    y = v1 / np.sqrt(c)

    if anchor_idx:
        pos = np.mean([x[k] for k, s in anchor_idx if s > 0])
        neg = np.mean([x[k] for k, s in anchor_idx if s < 0])
        if pos < neg:
            x, y = -x, -y

    mu = float(np.mean(x))
    s = float(np.std(x))
    if not s > 0:
        raise ZeroVariance("user coordinates have zero variance")
    theta = (x - mu) / s
    phi = (y - mu) / s
    return IdeologyModel(graph.user_ids, graph.item_ids, theta, phi, sigma, mu, s, iters)


def _barycenter(positions: Iterable[float], what: str) -> float:
    arr = np.fromiter(positions, dtype=np.float64)
    if arr.size == 0:
        raise EmptySharerSet(f"cannot fold in with no {what}")
    return float(arr.mean())


def fold_in_item(model: Optional[IdeologyModel], sharer_positions: Sequence[float]) -> float:
    """Position a new item at the mean position of the users who shared it.

    No ``1/sigma1`` rescaling is applied, so folded-in points sit slightly
    closer to 0 than a refit would put them.
    """
    return _barycenter(sharer_positions, "sharers")


def fold_in_user(model: Optional[IdeologyModel], shared_item_positions: Sequence[float]) -> float:
    """Position a new user at the mean position of the items they shared."""
    return _barycenter(shared_item_positions, "shared items")


def item_positions_for(graph: InteractionGraph, model: IdeologyModel) -> np.ndarray:
    """Item positions indexed by ``graph``'s internal item indices.

    Items the model does not know are folded in from their sharers' fitted
    positions; items with no positioned sharer get NaN.
    """
    out = np.full(graph.num_items, np.nan)
    for k, iid in enumerate(graph.item_ids):
        p = model.item_position(iid)
        if p is not None:
            out[k] = p
            continue
        sharers = [graph.user_ids[u] for u in graph.item_users(k)]
        known = [model.user_position(s) for s in sharers if model.has_user(s)]
        if known:
            out[k] = fold_in_item(model, known)
    return out
