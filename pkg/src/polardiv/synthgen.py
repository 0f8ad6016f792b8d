"""Synthetic two-community share data with known positions.

All randomness comes from one ``numpy.random.default_rng(seed)`` (PCG64)
stream, drawn in a fixed order: user positions, item positions, then one
uniform per (user, item) pair in row-major order. PCG64 and numpy's
normal/uniform samplers are platform independent, so a seed pins the
output bit for bit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, List

import numpy as np

from .errors import DataError, InvalidParams
from .graph import InteractionEvent


@dataclass(frozen=True)
class SynthParams:
    n_users: int = 1000
    n_items: int = 400
    mean_a: float = -1.0
    mean_b: float = 1.0
    std: float = 0.25
    rho: float = 0.05
    bandwidth: float = 0.5
    seed: int = 7

    def validate(self):
        if self.n_users < 2 or self.n_items < 2:
            raise InvalidParams("need at least two users and two items")
        if not self.std > 0:
            raise InvalidParams("std must be positive")
        if not 0 < self.rho <= 1:
            raise InvalidParams("rho must lie in (0, 1]")
        if not self.bandwidth > 0:
            raise InvalidParams("bandwidth must be positive")


@dataclass
class SynthDataset:
    events: List[InteractionEvent]
    true_theta: np.ndarray
    true_phi: np.ndarray
    user_community: np.ndarray
    item_community: np.ndarray

    @property
    def user_ids(self):
        return [f"u{k}" for k in range(len(self.true_theta))]

    @property
    def item_ids(self):
        return [f"i{k}" for k in range(len(self.true_phi))]

    def cross_community_fraction(self) -> float:
        """Share of events linking a user and an item from different communities."""
        if not self.events:
            return 0.0
        cross = sum(
            self.user_community[int(ev.user[1:])] != self.item_community[int(ev.item[1:])]
            for ev in self.events
        )
        return cross / len(self.events)

    def write_truth(self, fp: IO[str]) -> None:
        w = csv.writer(fp, lineterminator="\n")
        w.writerow(["id", "kind", "position"])
        for uid, t in zip(self.user_ids, self.true_theta.tolist()):
            w.writerow([uid, "user", repr(t)])
        for iid, p in zip(self.item_ids, self.true_phi.tolist()):
            w.writerow([iid, "item", repr(p)])


def read_truth(fp: IO[str]):
    """Read a ground-truth file into ``({user: pos}, {item: pos})``."""
    users, items = {}, {}
    reader = csv.DictReader(fp)
    if reader.fieldnames != ["id", "kind", "position"]:
        raise DataError("truth file must have header 'id,kind,position'")
    for row in reader:
        target = users if row["kind"] == "user" else items if row["kind"] == "item" else None
        if target is None:
            raise DataError(f"unknown kind {row['kind']!r}")
        try:
            target[row["id"]] = float(row["position"])
        except (TypeError, ValueError):
            raise DataError(f"bad position for {row['id']!r}") from None
    return users, items


def generate(params: SynthParams = SynthParams()) -> SynthDataset:
    params.validate()
    rng = np.random.default_rng(params.seed)
    nu, ni = params.n_users, params.n_items
    ua = math.ceil(nu / 2)
    ia = math.ceil(ni / 2)
    user_comm = np.r_[np.zeros(ua, dtype=np.int8), np.ones(nu - ua, dtype=np.int8)]
    item_comm = np.r_[np.zeros(ia, dtype=np.int8), np.ones(ni - ia, dtype=np.int8)]
    means = np.array([params.mean_a, params.mean_b])

    theta = means[user_comm] + params.std * rng.standard_normal(nu)
    phi = means[item_comm] + params.std * rng.standard_normal(ni)

    diff = theta[:, None] - phi[None, :]
    p = np.minimum(1.0, params.rho * np.exp(-(diff ** 2) / (2 * params.bandwidth ** 2)))
    share = rng.random((nu, ni)) < p

    # every user shares at least its nearest item
    for u in np.flatnonzero(~share.any(axis=1)):
        share[u, int(np.argmin(np.abs(diff[u])))] = True

    rows, cols = np.nonzero(share)  # row-major, i.e. (u, i) lexicographic
    events = [
        InteractionEvent(f"u{u}", f"i{i}", ts, "share")
        for ts, (u, i) in enumerate(zip(rows.tolist(), cols.tolist()))
    ]
    return SynthDataset(events, theta, phi, user_comm, item_comm)
