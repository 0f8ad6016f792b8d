"""Share events and the binary user-item interaction graph."""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import EmptyAfterPrune, EmptyEventSet, MalformedLine, UnknownUser

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InteractionEvent:
    user: str
    item: str
    ts: Optional[int] = None
    kind: str = "share"

    def __post_init__(self):
        if not isinstance(self.user, str) or not self.user:
            raise ValueError("user must be a non-empty string")
        if not isinstance(self.item, str) or not self.item:
            raise ValueError("item must be a non-empty string")
        if self.ts is not None and self.ts < 0:
            raise ValueError("ts must be non-negative")

    def to_json(self) -> str:
        rec = {"user": self.user, "item": self.item}
        if self.ts is not None:
            rec["ts"] = self.ts
        rec["kind"] = self.kind
        return json.dumps(rec, separators=(",", ":"), ensure_ascii=False)


class ParseResult(NamedTuple):
    events: list
    skipped: int


def _event_from_line(line: str) -> InteractionEvent:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    user = rec.get("user")
    item = rec.get("item")
    if not isinstance(user, str) or not user:
        raise ValueError("missing or invalid 'user'")
    if not isinstance(item, str) or not item:
        raise ValueError("missing or invalid 'item'")
    ts = rec.get("ts")
    if ts is not None and (isinstance(ts, bool) or not isinstance(ts, int) or ts < 0):
        raise ValueError("'ts' must be a non-negative integer")
    kind = rec.get("kind", "share")
    if not isinstance(kind, str):
        raise ValueError("'kind' must be a string")
    return InteractionEvent(user, item, ts, kind)


def parse_events(stream: Union[IO, bytes, str, Iterable], strict: bool = True) -> ParseResult:
    """Parse newline-delimited JSON share events.

    Parameters
    ----------
    stream : binary or text file object, bytes, str, or iterable of lines
        UTF-8 encoded records, one object per line. Blank lines are ignored.
    strict : bool
        If true, the first malformed line raises :class:`MalformedLine`.
        Otherwise malformed lines are skipped and counted.

    Returns
    -------
    ParseResult
        ``(events, skipped)`` with events in file order.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str):
        stream = io.StringIO(stream)

    events = []
    skipped = 0
    for line_no, raw in enumerate(stream, start=1):
        if isinstance(raw, (bytes, bytearray)):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                if strict:
                    raise MalformedLine(line_no, "invalid UTF-8") from e
                skipped += 1
                continue
        else:
            line = raw
        if not line.strip():
            continue
        try:
            events.append(_event_from_line(line))
        except ValueError as e:
            if strict:
                raise MalformedLine(line_no, str(e)) from e
            skipped += 1
    if skipped:
        _log.warning("skipped %d malformed event lines", skipped)
    return ParseResult(events, skipped)


def write_events(events: Iterable[InteractionEvent], fp: IO[str]) -> None:
    for ev in events:
        fp.write(ev.to_json())
        fp.write("\n")


class InteractionGraph:
    """Immutable binary bipartite graph between users and items.

    Internal indices are dense (``0..num_users-1`` and ``0..num_items-1``).
    The incidence matrix is kept twice in CSR form, once per side, so both
    adjacency directions are cheap slices.
    """

    def __init__(self, user_ids: Sequence[str], item_ids: Sequence[str], rows, cols):
        self.user_ids = tuple(user_ids)
        self.item_ids = tuple(item_ids)
        self.user_index = {u: k for k, u in enumerate(self.user_ids)}
        self.item_index = {i: k for k, i in enumerate(self.item_ids)}
        nu, ni = len(self.user_ids), len(self.item_ids)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        R = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nu, ni))
        R.sum_duplicates()
        R.data[:] = 1.0
        R.sort_indices()
        Rt = R.T.tocsr()
        Rt.sort_indices()
        for m in (R, Rt):
            m.data.setflags(write=False)
            m.indices.setflags(write=False)
            m.indptr.setflags(write=False)
        self._R = R
        self._Rt = Rt
        self.user_degree = np.diff(R.indptr)
        self.item_degree = np.diff(Rt.indptr)
        self.user_degree.setflags(write=False)
        self.item_degree.setflags(write=False)

    @property
    def num_users(self) -> int:
        return len(self.user_ids)

    @property
    def num_items(self) -> int:
        return len(self.item_ids)

    @property
    def n(self) -> int:
        return int(self._R.nnz)

    @property
    def incidence(self) -> sp.csr_matrix:
        """Binary users x items matrix (read-only)."""
        return self._R

    @property
    def incidence_t(self) -> sp.csr_matrix:
        """Binary items x users matrix (read-only)."""
        return self._Rt

    def user_items(self, u: int) -> np.ndarray:
        R = self._R
        return R.indices[R.indptr[u]:R.indptr[u + 1]]

    def item_users(self, i: int) -> np.ndarray:
        Rt = self._Rt
        return Rt.indices[Rt.indptr[i]:Rt.indptr[i + 1]]

    def user(self, ext_id: str) -> int:
        try:
            return self.user_index[ext_id]
        except KeyError:
            raise UnknownUser(f"unknown user {ext_id!r}") from None

    def edges(self) -> set:
        """Edge set on external identifiers."""
        out = set()
        for u in range(self.num_users):
            uid = self.user_ids[u]
            out.update((uid, self.item_ids[i]) for i in self.user_items(u))
        return out

    def __repr__(self):
        return f"<InteractionGraph users={self.num_users} items={self.num_items} n={self.n}>"


def build_graph(events: Iterable[InteractionEvent]) -> InteractionGraph:
    """Build the binary graph; indices follow first appearance, repeats collapse."""
    users: dict = {}
    items: dict = {}
    rows = []
    cols = []
    for ev in events:
        u = users.setdefault(ev.user, len(users))
        i = items.setdefault(ev.item, len(items))
        rows.append(u)
        cols.append(i)
    if not rows:
        raise EmptyEventSet("no events to build a graph from")
    return InteractionGraph(list(users), list(items), rows, cols)


def prune(graph: InteractionGraph, min_user_deg: int = 1, min_item_deg: int = 1) -> InteractionGraph:
    """Drop low-degree users and items repeatedly until every survivor qualifies."""
    if min_user_deg < 1 or min_item_deg < 1:
        raise ValueError("prune thresholds must be >= 1")
    R = graph.incidence.tocsr(copy=True)
    keep_u = np.ones(graph.num_users, dtype=bool)
    keep_i = np.ones(graph.num_items, dtype=bool)
    while True:
        sub = R[keep_u][:, keep_i]
        du = np.zeros(graph.num_users, dtype=np.int64)
        di = np.zeros(graph.num_items, dtype=np.int64)
        du[keep_u] = np.diff(sub.tocsr().indptr)
        di[keep_i] = np.diff(sub.tocsc().indptr)
        new_u = keep_u & (du >= min_user_deg)
        new_i = keep_i & (di >= min_item_deg)
        if np.array_equal(new_u, keep_u) and np.array_equal(new_i, keep_i):
            break
        keep_u, keep_i = new_u, new_i
    if not keep_u.any() or not keep_i.any():
        raise EmptyAfterPrune("no users or items survive pruning")

    sub = R[keep_u][:, keep_i].tocoo()
    user_ids = [graph.user_ids[k] for k in np.flatnonzero(keep_u)]
    item_ids = [graph.item_ids[k] for k in np.flatnonzero(keep_i)]
    return InteractionGraph(user_ids, item_ids, sub.row, sub.col)
