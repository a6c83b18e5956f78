"""Propagation-weighted social graph: ingestion, sampling, synthesis.

Users carry dense integer ids (0..N-1) plus external string labels.  Edges are
directed and weighted; the weight of edge (u, v) is the expected volume of
content that propagates from u to v per accounting period (e.g. reshares per
day).  The accounting period itself is opaque to this package: weights are
taken as given and every downstream quantity inherits their unit.

The structure is immutable after construction.  Duplicate edge records are
summed, self-loops are rejected, and users that appear only as labels are kept
as isolated nodes.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class PropagationEdge:
    """One directed edge: expected propagation volume from src to dst."""

    src: int
    dst: int
    weight: float


@dataclass(frozen=True)
class SocialConnection:
    """Unordered user pair sharing at least one directed edge.

    combined_weight is the sum of both directions' propagation volume and is
    the sort key for re-hosting priority.
    """

    a: int
    b: int
    combined_weight: float


class SocialGraph:
    """Directed weighted social graph with dense user ids.

    Internally stores edges as parallel numpy arrays sorted by (src, dst),
    plus CSR-style adjacency for out-edges, in-edges and the merged "friend"
    view (union of both directions, with per-direction weights aligned).
    """

    def __init__(self, labels, src, dst, weight):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValidationError("user labels must be unique")
        n = len(labels)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        if not (src.shape == dst.shape == weight.shape):
            raise ValidationError("edge arrays must have equal length")
        if src.size:
            if src.min(initial=0) < 0 or dst.min(initial=0) < 0:
                raise ValidationError("edge endpoint out of range")
            if max(src.max(initial=0), dst.max(initial=0)) >= n:
                raise ValidationError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValidationError("self-loops are not allowed")
            if not np.all(np.isfinite(weight)) or np.any(weight < 0):
                raise ValidationError("edge weights must be finite and non-negative")

        # merge duplicate ordered pairs by summing, canonical (src, dst) order
        if src.size:
            key = src * n + dst
            uniq, inv = np.unique(key, return_inverse=True)
            w = np.zeros(uniq.size, dtype=np.float64)
            np.add.at(w, inv, weight)
            src = (uniq // n).astype(np.int64)
            dst = (uniq % n).astype(np.int64)
            weight = w

        self._labels = labels
        self._ids = {lab: i for i, lab in enumerate(labels)}
        self._src = src
        self._dst = dst
        self._w = weight
        for arr in (self._src, self._dst, self._w):
            arr.setflags(write=False)

        self._out = _build_csr(n, src, dst, weight)
        self._in = _build_csr(n, dst, src, weight)
        self._friends = _build_friend_csr(n, src, dst, weight)
        self._conn_cache = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_records(cls, records, extra_users=()):
        """Build from (src_label, dst_label, weight) records.

        Labels get dense ids in order of first appearance; extra_users (if
        given) are appended as isolated nodes when they carry no edges.
        """
        labels = []
        ids = {}

        def intern(lab, rownum):
            if not isinstance(lab, str) or not lab:
                raise ParseError("user label must be a non-empty string", rownum)
            i = ids.get(lab)
            if i is None:
                i = len(labels)
                ids[lab] = i
                labels.append(lab)
            return i

        src, dst, wt = [], [], []
        for rownum, rec in enumerate(records, start=1):
            if len(rec) != 3:
                raise ParseError(f"expected 3 fields, got {len(rec)}", rownum)
            a, b, w = rec
            ia = intern(a, rownum)
            ib = intern(b, rownum)
            if ia == ib:
                raise ParseError(f"self-loop on user {a!r}", rownum)
            try:
                w = float(w)
            except (TypeError, ValueError):
                raise ParseError(f"bad weight {w!r}", rownum) from None
            if not np.isfinite(w) or w < 0:
                raise ParseError(f"weight must be finite and non-negative, got {w}", rownum)
            src.append(ia)
            dst.append(ib)
            wt.append(w)
        for lab in extra_users:
            if lab not in ids:
                ids[lab] = len(labels)
                labels.append(lab)
        return cls(labels, src, dst, wt)

    @classmethod
    def from_json(cls, text):
        """Inverse of to_json."""
        doc = json.loads(text)
        users = doc["users"]
        edges = doc["edges"]
        src = [e[0] for e in edges]
        dst = [e[1] for e in edges]
        wt = [e[2] for e in edges]
        return cls(users, src, dst, wt)

    # -- basic accessors ---------------------------------------------------

    @property
    def n_users(self):
        return len(self._labels)

    @property
    def n_edges(self):
        return int(self._src.size)

    @property
    def labels(self):
        return self._labels

    def user_id(self, label):
        try:
            return self._ids[label]
        except KeyError:
            raise ValidationError(f"unknown user label {label!r}") from None

    def label_of(self, user):
        return self._labels[user]

    def edge_arrays(self):
        """(src, dst, weight) arrays sorted by (src, dst); read-only views."""
        return self._src, self._dst, self._w

    def edges(self):
        for s, d, w in zip(self._src, self._dst, self._w):
            yield PropagationEdge(int(s), int(d), float(w))

    @property
    def total_edge_weight(self):
        return float(self._w.sum())

    def out_neighbors(self, u):
        """(neighbor ids, weights) of edges leaving u, ids ascending."""
        off, nbr, w = self._out
        return nbr[off[u]:off[u + 1]], w[off[u]:off[u + 1]]

    def in_neighbors(self, u):
        off, nbr, w = self._in
        return nbr[off[u]:off[u + 1]], w[off[u]:off[u + 1]]

    def friends(self, u):
        """Users sharing at least one edge with u in either direction."""
        off, nbr, _, _ = self._friends
        return nbr[off[u]:off[u + 1]]

    def friend_arrays(self, u):
        """(neighbors, weight u->nbr, weight nbr->u), neighbors ascending."""
        off, nbr, wout, win = self._friends
        sl = slice(off[u], off[u + 1])
        return nbr[sl], wout[sl], win[sl]

    def friend_csr(self):
        """Raw merged-adjacency arrays (offsets, neighbors, w_out, w_in)."""
        return self._friends

    def edge_weight(self, u, v):
        """Weight of directed edge u->v, 0.0 if absent."""
        nbr, wout, _ = self.friend_arrays(u)
        pos = np.searchsorted(nbr, v)
        if pos < nbr.size and nbr[pos] == v:
            return float(wout[pos])
        return 0.0

    def mean_out_weight(self, u):
        """Mean weight of u's outgoing edges (0.0 when u has none)."""
        _, w = self.out_neighbors(u)
        if w.size == 0:
            return 0.0
        return float(w.mean())

    # -- connections -------------------------------------------------------

    def connection_arrays(self):
        """(a, b, combined_weight) arrays over unordered pairs, a < b."""
        if self._conn_cache is None:
            n = self.n_users
            if self._src.size == 0:
                empty = np.empty(0, dtype=np.int64)
                self._conn_cache = (empty, empty.copy(), np.empty(0, dtype=np.float64))
            else:
                a = np.minimum(self._src, self._dst)
                b = np.maximum(self._src, self._dst)
                key = a * n + b
                uniq, inv = np.unique(key, return_inverse=True)
                w = np.zeros(uniq.size, dtype=np.float64)
                np.add.at(w, inv, self._w)
                ca = (uniq // n).astype(np.int64)
                cb = (uniq % n).astype(np.int64)
                for arr in (ca, cb, w):
                    arr.setflags(write=False)
                self._conn_cache = (ca, cb, w)
        return self._conn_cache

    @property
    def n_connections(self):
        return int(self.connection_arrays()[0].size)

    def connections(self):
        ca, cb, w = self.connection_arrays()
        for a, b, cw in zip(ca, cb, w):
            yield SocialConnection(int(a), int(b), float(cw))

    # -- serialization -----------------------------------------------------

    def to_json(self):
        """Canonical JSON document: {"users": [...], "edges": [[s,d,w],...]}."""
        edges = [[int(s), int(d), float(w)] for s, d, w in zip(self._src, self._dst, self._w)]
        return json.dumps({"users": list(self._labels), "edges": edges})

    def to_csv(self, path):
        """Write headerless src_label,dst_label,weight rows (UTF-8, LF)."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            for s, d, w in zip(self._src, self._dst, self._w):
                wr.writerow([self._labels[s], self._labels[d], repr(float(w))])

    # -- derived graphs ----------------------------------------------------

    def subgraph(self, user_ids):
        """Induced subgraph on user_ids; new ids follow ascending old ids."""
        keep = np.unique(np.asarray(list(user_ids), dtype=np.int64))
        if keep.size and (keep[0] < 0 or keep[-1] >= self.n_users):
            raise ValidationError("subgraph user id out of range")
        remap = np.full(self.n_users, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        mask = (remap[self._src] >= 0) & (remap[self._dst] >= 0)
        labels = [self._labels[i] for i in keep]
        return SocialGraph(labels, remap[self._src[mask]], remap[self._dst[mask]], self._w[mask])


def _build_csr(n, row, col, w):
    order = np.lexsort((col, row))
    row = row[order]
    col = col[order]
    w = w[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, row + 1, 1)
    np.cumsum(offsets, out=offsets)
    for arr in (offsets, col, w):
        arr.setflags(write=False)
    return offsets, col, w


def _build_friend_csr(n, src, dst, w):
    # stack both directions so each user sees the union of its neighbors
    row = np.concatenate([src, dst])
    col = np.concatenate([dst, src])
    wout = np.concatenate([w, np.zeros_like(w)])
    win = np.concatenate([np.zeros_like(w), w])
    if row.size:
        key = row * n + col
        uniq, inv = np.unique(key, return_inverse=True)
        mo = np.zeros(uniq.size, dtype=np.float64)
        mi = np.zeros(uniq.size, dtype=np.float64)
        np.add.at(mo, inv, wout)
        np.add.at(mi, inv, win)
        row = (uniq // n).astype(np.int64)
        col = (uniq % n).astype(np.int64)
        wout, win = mo, mi
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, row + 1, 1)
    np.cumsum(offsets, out=offsets)
    for arr in (offsets, col, wout, win):
        arr.setflags(write=False)
    return offsets, col, wout, win


def load_graph(source):
    """Load a graph from an edge table.

    source may be a path to a headerless CSV (src_label,dst_label,weight,
    UTF-8, LF), or an iterable of (src_label, dst_label, weight) records.
    Duplicate ordered pairs are summed; self-loops and negative weights raise
    ParseError with the offending line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh)]
        return SocialGraph.from_records(rows)
    return SocialGraph.from_records(source)


def bfs_sample(graph, seed_count, target_size, rng_seed):
    """Breadth-first sample of target_size users around random seed users.

    Seeds are drawn uniformly without replacement, enqueued in ascending id
    order, and the frontier expands FIFO with neighbors visited in ascending
    id order.  Returns the induced subgraph.  If the reachable set is
    exhausted before target_size (or target_size exceeds the graph), the full
    reachable set is returned and a UserWarning flags the truncation.
    """
    if graph.n_users == 0:
        raise ValidationError("cannot sample an empty graph")
    if seed_count < 1:
        raise ValidationError("seed_count must be >= 1")
    if target_size < seed_count:
        raise ValidationError("target_size must be >= seed_count")
    if seed_count > graph.n_users:
        raise ValidationError("seed_count exceeds number of users")

    rng = np.random.default_rng(rng_seed)
    seeds = np.sort(rng.choice(graph.n_users, size=seed_count, replace=False))

    effective_target = min(target_size, graph.n_users)
    visited = set(int(s) for s in seeds)
    queue = list(int(s) for s in seeds)
    head = 0
    while head < len(queue) and len(visited) < effective_target:
        u = queue[head]
        head += 1
        for v in graph.friends(u):
            v = int(v)
            if v not in visited:
                visited.add(v)
                queue.append(v)
                if len(visited) >= effective_target:
                    break
    if len(visited) < target_size:
        warnings.warn(
            f"bfs_sample stopped at {len(visited)} users (target {target_size}): "
            "sample is self-contained",
            UserWarning,
            stacklevel=2,
        )
    return graph.subgraph(visited)


def synth_graph(n_users, mean_degree, weight_tail_exponent, rng_seed):
    """Random directed graph with heavy-tailed propagation weights.

    Draws round(n_users * mean_degree) candidate edges with uniform random
    endpoints, drops self-loops, merges duplicate ordered pairs, and assigns
    each edge an integer weight from a discrete power law (Zipf) with the
    given tail exponent (> 1).  Labels are "u0".."u{n-1}".  Deterministic for
    a fixed rng_seed.
    """
    if n_users < 2:
        raise ValidationError("n_users must be >= 2")
    if mean_degree <= 0:
        raise ValidationError("mean_degree must be positive")
    if weight_tail_exponent <= 1:
        raise ValidationError("weight_tail_exponent must be > 1")

    rng = np.random.default_rng(rng_seed)
    m = int(round(n_users * mean_degree))
    src = rng.integers(0, n_users, size=m, dtype=np.int64)
    dst = rng.integers(0, n_users, size=m, dtype=np.int64)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    w = rng.zipf(weight_tail_exponent, size=src.size).astype(np.float64)
    labels = [f"u{i}" for i in range(n_users)]
    return SocialGraph(labels, src, dst, w)
