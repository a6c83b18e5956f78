"""Placement objective: preference satisfaction minus weighted transfer cost.

An assignment maps every user to exactly one cloud.  Each social connection
whose endpoints land on different clouds forces cross-cloud replication of
the propagated content, priced per direction by the pricing matrix.  The
per-user replication cost splits every connection's cost evenly between its
two endpoints, so the per-user costs sum to the plain directed total

    sum over directed edges (u, v) of price[cloud(u), cloud(v)] * weight(u, v)

with nothing counted twice.  The score an assignment maximizes is

    sum over users u of  alpha * pref(u, cloud(u))
                       - (1 - alpha) * cost_weight * replication_cost(u)

where pref is the normalized preference by default (raw preference on
request) and cost_weight calibrates propagation volume units against
preference units.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .cloud import preference_matrix
from .errors import ValidationError


@dataclass(frozen=True)
class ObjectiveParams:
    """alpha in [0, 1] trades preference (1) against transfer cost (0);
    cost_weight scales the cost term; use_normalized selects normalized or
    raw preference inside the score."""

    alpha: float
    cost_weight: float = 1.0
    use_normalized: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha must lie in [0, 1]")
        if self.cost_weight <= 0:
            raise ValidationError("cost_weight must be positive")


class Assignment:
    """Total map user id -> cloud id, backed by an int array."""

    def __init__(self, host):
        self.host = np.asarray(host, dtype=np.int64).copy()
        if self.host.ndim != 1:
            raise ValidationError("assignment must be a flat user->cloud array")

    @property
    def n_users(self):
        return int(self.host.size)

    def cloud_of(self, u):
        return int(self.host[u])

    def copy(self):
        return Assignment(self.host)

    def validate(self, n_users, n_clouds):
        if self.host.size != n_users:
            raise ValidationError(f"assignment covers {self.host.size} users, expected {n_users}")
        if self.host.size and (self.host.min() < 0 or self.host.max() >= n_clouds):
            raise ValidationError("assignment references an unknown cloud")

    def __eq__(self, other):
        return isinstance(other, Assignment) and np.array_equal(self.host, other.host)

    def __repr__(self):
        return f"Assignment({self.host.tolist()})"

    def to_csv(self, path, graph, model):
        """Headerless user_label,cloud_label rows in user id order."""
        self.validate(graph.n_users, model.n_clouds)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            for u in range(graph.n_users):
                wr.writerow([graph.label_of(u), model.cloud_labels[self.host[u]]])

    @classmethod
    def from_csv(cls, path, graph, model):
        host = np.full(graph.n_users, -1, dtype=np.int64)
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if len(row) != 2:
                    raise ValidationError(f"line {lineno}: expected 2 fields")
                u = graph.user_id(row[0].strip())
                if host[u] >= 0:
                    raise ValidationError(f"line {lineno}: duplicate user {row[0]!r}")
                host[u] = model.cloud_id(row[1].strip())
        if np.any(host < 0):
            missing = graph.label_of(int(np.nonzero(host < 0)[0][0]))
            raise ValidationError(f"assignment missing user {missing!r}")
        return cls(host)


def replication_cost(u, assignment, graph, model):
    """User u's half-share of the priced traffic on its connections."""
    nbrs, wout, win = graph.friend_arrays(u)
    if nbrs.size == 0:
        return 0.0
    P = model.pricing.matrix
    cu = assignment.host[u]
    cn = assignment.host[nbrs]
    return float(0.5 * (P[cu, cn] @ wout + P[cn, cu] @ win))


def transfer_cost_total(assignment, graph, model):
    """Directed priced traffic total; equals the sum of per-user costs."""
    src, dst, w = graph.edge_arrays()
    if src.size == 0:
        return 0.0
    P = model.pricing.matrix
    h = assignment.host
    return float(np.dot(P[h[src], h[dst]], w))


def total_objective(assignment, graph, model, params):
    """Score of a full assignment under the given trade-off parameters."""
    assignment.validate(graph.n_users, model.n_clouds)
    psi = preference_matrix(graph, model, normalized=params.use_normalized)
    pref = float(psi[np.arange(graph.n_users), assignment.host].sum())
    cost = transfer_cost_total(assignment, graph, model)
    return params.alpha * pref - (1.0 - params.alpha) * params.cost_weight * cost


@dataclass
class EvaluationReport:
    """Headline metrics of one assignment.

    preference_satisfaction always uses normalized preference so values are
    comparable across model scales; objective_value follows the params.
    per_cloud_user_counts is keyed by cloud label.
    """

    objective_value: float
    preference_satisfaction: float
    inter_cloud_cost: float
    inter_cloud_edge_count: int
    per_cloud_user_counts: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "objective_value": self.objective_value,
            "preference_satisfaction": self.preference_satisfaction,
            "inter_cloud_cost": self.inter_cloud_cost,
            "inter_cloud_edge_count": self.inter_cloud_edge_count,
            "per_cloud_user_counts": dict(self.per_cloud_user_counts),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            objective_value=d["objective_value"],
            preference_satisfaction=d["preference_satisfaction"],
            inter_cloud_cost=d["inter_cloud_cost"],
            inter_cloud_edge_count=d["inter_cloud_edge_count"],
            per_cloud_user_counts=d["per_cloud_user_counts"],
        )


def evaluate(assignment, graph, model, params):
    """Full metric sweep of an assignment.

    inter_cloud_cost sums priced traffic on cross-cloud directed edges only
    (each directed edge counted once, no halving); inter_cloud_edge_count
    counts cross-cloud unordered connections.
    """
    assignment.validate(graph.n_users, model.n_clouds)
    h = assignment.host
    src, dst, w = graph.edge_arrays()
    P = model.pricing.matrix
    if src.size:
        cross = h[src] != h[dst]
        inter_cost = float(np.dot(P[h[src], h[dst]] * cross, w))
    else:
        inter_cost = 0.0
    ca, cb, _ = graph.connection_arrays()
    edge_count = int(np.count_nonzero(h[ca] != h[cb]))
    psi_norm = preference_matrix(graph, model, normalized=True)
    pref_sat = float(psi_norm[np.arange(graph.n_users), h].sum())
    counts = np.bincount(h, minlength=model.n_clouds)
    return EvaluationReport(
        objective_value=total_objective(assignment, graph, model, params),
        preference_satisfaction=pref_sat,
        inter_cloud_cost=inter_cost,
        inter_cloud_edge_count=edge_count,
        per_cloud_user_counts={model.cloud_labels[c]: int(counts[c]) for c in range(model.n_clouds)},
    )
