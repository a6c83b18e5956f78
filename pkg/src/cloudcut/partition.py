"""Two-phase placement heuristic, exhaustive oracle, and reference baselines.

Phase one hosts every user on the cloud it prefers most.  Phase two walks the
cross-cloud social connections once, heaviest combined propagation weight
first, and for each pair (u, v) hosted on clouds (c, d) scores four options:

  keep       leave both users where they are (gain 0 by definition)
  move_u     re-host u onto d
  move_v     re-host v onto c
  move_both  re-host both onto the best third cloud f

The gain of a move is the preference change it buys minus the weighted change
in replication cost it causes, i.e. exactly the change in the placement score
when the cost delta runs in "exact" mode.  The option with the largest gain
is applied (ties keep users put, biased toward not moving), and the walk
stops when either a touched-connection budget is spent or the best gain falls
below a threshold, depending on the termination mode.

Cost deltas come in two flavors:

  exact  the true change in total priced traffic over every edge incident to
         the moved user(s), neighbors on third clouds included; applied gains
         then equal the score delta to rounding error.
  local  a cheaper score that only looks at neighbors on the clouds directly
         involved in the move and charges each connection half to each
         endpoint; it matches exact rankings only under uniform pricing and
         is kept for comparison runs against solvers that score moves this
         way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .cloud import preference_matrix
from .errors import SearchSpaceError, ValidationError
from .objective import Assignment, ObjectiveParams

_CASES = ("keep", "move_u", "move_v", "move_both")
_TERMINATION_MODES = ("gain_threshold", "budget", "both")
_DELTA_MODES = ("exact", "local")


@dataclass(frozen=True)
class HeuristicParams:
    """Knobs of the re-hosting walk.

    min_gain is the stop threshold on the per-connection best gain (score
    units); touched_budget is the fraction of all connections the walk may
    pop before stopping; termination_mode picks which of the two stops apply.
    """

    objective: ObjectiveParams
    min_gain: float = 0.0
    touched_budget: float = 0.2
    termination_mode: str = "both"
    delta_mode: str = "exact"

    def __post_init__(self):
        if self.termination_mode not in _TERMINATION_MODES:
            raise ValidationError(f"termination_mode must be one of {_TERMINATION_MODES}")
        if self.delta_mode not in _DELTA_MODES:
            raise ValidationError(f"delta_mode must be one of {_DELTA_MODES}")
        if not 0.0 <= self.touched_budget <= 1.0:
            raise ValidationError("touched_budget must lie in [0, 1]")
        if not math.isfinite(self.min_gain):
            raise ValidationError("min_gain must be finite")


@dataclass(frozen=True)
class RehostMove:
    """One candidate re-hosting of a cross-cloud pair.

    case "move_u" sends u to v's cloud, "move_v" sends v to u's cloud,
    "move_both" sends both to target (a cloud distinct from either side).
    """

    u: int
    v: int
    case: str
    target: int | None = None

    def __post_init__(self):
        if self.case not in _CASES[1:]:
            raise ValidationError(f"case must be one of {_CASES[1:]}")
        if self.case == "move_both" and self.target is None:
            raise ValidationError("move_both requires a target cloud")


@dataclass(frozen=True)
class RehostGains:
    """Gains of the four options for one cross-cloud pair.

    move_both is -inf when no third cloud exists; best_third_cloud is the
    argmax target for move_both (None in that case).
    """

    keep: float
    move_u: float
    move_v: float
    move_both: float
    best_third_cloud: int | None

    def best(self):
        """(case, gain); ties resolve in listed order, so staying put wins."""
        best_case, best_gain = "keep", self.keep
        for case, gain in (("move_u", self.move_u), ("move_v", self.move_v),
                           ("move_both", self.move_both)):
            if gain > best_gain:
                best_case, best_gain = case, gain
        return best_case, best_gain


def _cloud_flows(u, host, graph, n_clouds):
    """Per-cloud traffic aggregates of u: (out[g], in[g]) over neighbor clouds."""
    nbrs, wout, win = graph.friend_arrays(u)
    cn = host[nbrs]
    a_out = np.bincount(cn, weights=wout, minlength=n_clouds)
    a_in = np.bincount(cn, weights=win, minlength=n_clouds)
    return a_out, a_in


def _seat_costs(a_out, a_in, P):
    """Vector over clouds x: priced traffic on u's edges if u sat on x."""
    return P @ a_out + P.T @ a_in


def propagation_delta(move, assignment, graph, model, cost_weight=1.0, mode="exact"):
    """Weighted replication-cost change a move would cause (negative saves).

    The pair must currently straddle two clouds.  See the module docstring
    for the exact/local distinction.
    """
    if mode not in _DELTA_MODES:
        raise ValidationError(f"mode must be one of {_DELTA_MODES}")
    u, v = move.u, move.v
    host = assignment.host
    c, d = int(host[u]), int(host[v])
    if c == d:
        raise ValidationError("pair is not cross-cloud; no re-hosting case applies")
    P = model.pricing.matrix
    C = model.n_clouds
    if move.case == "move_both":
        f = move.target
        if f in (c, d):
            raise ValidationError("move_both target must be a third cloud")
        if not 0 <= f < C:
            raise ValidationError("move_both target out of range")

    if mode == "local":
        a_out_u, a_in_u = _cloud_flows(u, host, graph, C)
        if move.case == "move_u":
            gain_side = P[c, d] * a_in_u[c] + P[d, c] * a_out_u[c]
            save_side = P[c, d] * a_out_u[d] + P[d, c] * a_in_u[d]
            return 0.5 * cost_weight * (gain_side - save_side)
        a_out_v, a_in_v = _cloud_flows(v, host, graph, C)
        if move.case == "move_v":
            gain_side = P[d, c] * a_in_v[d] + P[c, d] * a_out_v[d]
            save_side = P[d, c] * a_out_v[c] + P[c, d] * a_in_v[c]
            return 0.5 * cost_weight * (gain_side - save_side)
        f = move.target
        return 0.5 * cost_weight * (
            P[c, d] * a_in_u[c] + P[d, c] * a_out_u[c]
            - (P[c, f] * a_out_u[f] + P[f, c] * a_in_u[f])
            + P[d, c] * a_in_v[d] + P[c, d] * a_out_v[d]
            - (P[d, f] * a_out_v[f] + P[f, d] * a_in_v[f])
        )

    # exact mode: true change in total priced traffic on incident edges
    a_out_u, a_in_u = _cloud_flows(u, host, graph, C)
    seat_u = _seat_costs(a_out_u, a_in_u, P)
    if move.case == "move_u":
        return cost_weight * float(seat_u[d] - seat_u[c])
    a_out_v, a_in_v = _cloud_flows(v, host, graph, C)
    seat_v = _seat_costs(a_out_v, a_in_v, P)
    if move.case == "move_v":
        return cost_weight * float(seat_v[c] - seat_v[d])
    f = move.target
    e_uv = graph.edge_weight(u, v)
    e_vu = graph.edge_weight(v, u)
    # score both single moves with the mutual edge removed, then re-add it
    seat_u_solo = seat_u - (P[:, d] * e_uv + P[d, :] * e_vu)
    seat_v_solo = seat_v - (P[:, c] * e_vu + P[c, :] * e_uv)
    pair_delta = P[f, f] * (e_uv + e_vu) - (P[c, d] * e_uv + P[d, c] * e_vu)
    return cost_weight * float(
        seat_u_solo[f] - seat_u_solo[c] + seat_v_solo[f] - seat_v_solo[d] + pair_delta
    )


def _pair_gains(u, v, host, psi, graph, P, alpha, cost_scale, mode):
    """RehostGains for a cross-cloud pair given a precomputed preference table.

    cost_scale folds (1 - alpha) * cost_weight into one factor.
    """
    C = P.shape[0]
    c, d = int(host[u]), int(host[v])
    a_out_u, a_in_u = _cloud_flows(u, host, graph, C)
    a_out_v, a_in_v = _cloud_flows(v, host, graph, C)

    if mode == "exact":
        seat_u = _seat_costs(a_out_u, a_in_u, P)
        seat_v = _seat_costs(a_out_v, a_in_v, P)
        delta_u = seat_u[d] - seat_u[c]
        delta_v = seat_v[c] - seat_v[d]
        e_uv = graph.edge_weight(u, v)
        e_vu = graph.edge_weight(v, u)
        seat_u_solo = seat_u - (P[:, d] * e_uv + P[d, :] * e_vu)
        seat_v_solo = seat_v - (P[:, c] * e_vu + P[c, :] * e_uv)
        pair_delta = np.diag(P) * (e_uv + e_vu) - (P[c, d] * e_uv + P[d, c] * e_vu)
        delta_joint = (seat_u_solo - seat_u_solo[c]) + (seat_v_solo - seat_v_solo[d]) + pair_delta
    else:
        delta_u = 0.5 * (
            P[c, d] * a_in_u[c] + P[d, c] * a_out_u[c]
            - (P[c, d] * a_out_u[d] + P[d, c] * a_in_u[d])
        )
        delta_v = 0.5 * (
            P[d, c] * a_in_v[d] + P[c, d] * a_out_v[d]
            - (P[d, c] * a_out_v[c] + P[c, d] * a_in_v[c])
        )
        fixed = (P[c, d] * a_in_u[c] + P[d, c] * a_out_u[c]
                 + P[d, c] * a_in_v[d] + P[c, d] * a_out_v[d])
        per_f = (P[c, :] * a_out_u + P[:, c] * a_in_u
                 + P[d, :] * a_out_v + P[:, d] * a_in_v)
        delta_joint = 0.5 * (fixed - per_f)

    gain_u = alpha * (psi[u, d] - psi[u, c]) - cost_scale * delta_u
    gain_v = alpha * (psi[v, c] - psi[v, d]) - cost_scale * delta_v
    if C > 2:
        pref_joint = psi[u, :] + psi[v, :] - psi[u, c] - psi[v, d]
        joint = alpha * pref_joint - cost_scale * delta_joint
        joint[c] = -np.inf
        joint[d] = -np.inf
        f = int(np.argmax(joint))
        gain_joint = float(joint[f])
    else:
        f = None
        gain_joint = -np.inf
    return RehostGains(0.0, float(gain_u), float(gain_v), gain_joint, f)


def rehost_gains(u, v, assignment, graph, model, params):
    """Gains of the four re-hosting options for one cross-cloud pair."""
    host = assignment.host
    if int(host[u]) == int(host[v]):
        raise ValidationError("pair is not cross-cloud; no re-hosting case applies")
    psi = preference_matrix(graph, model, normalized=params.objective.use_normalized)
    cost_scale = (1.0 - params.objective.alpha) * params.objective.cost_weight
    return _pair_gains(u, v, host, psi, graph, model.pricing.matrix,
                       params.objective.alpha, cost_scale, params.delta_mode)


def initial_hosting(graph, model):
    """Host every user on its most-preferred cloud (lowest id wins ties)."""
    psi = preference_matrix(graph, model, normalized=False)
    return Assignment(np.argmax(psi, axis=1))


def run_heuristic(graph, model, params, telemetry=None):
    """Preference-first hosting followed by one cost-aware re-hosting walk.

    Walks the cross-cloud connections of the initial hosting once, in
    non-increasing combined-weight order, applying the best-gain move per
    pair.  telemetry, when given, is a writable text stream receiving one
    JSON line per examined connection and a final summary line.
    """
    if model.n_users != graph.n_users:
        raise ValidationError("model and graph disagree on user count")
    psi = preference_matrix(graph, model, normalized=params.objective.use_normalized)
    host = np.argmax(psi, axis=1)
    P = model.pricing.matrix
    alpha = params.objective.alpha
    cost_scale = (1.0 - alpha) * params.objective.cost_weight

    ca, cb, cw = graph.connection_arrays()
    total_connections = ca.size
    order = np.lexsort((cb, ca, -cw))
    cross = order[host[ca[order]] != host[cb[order]]]

    budget_capped = params.termination_mode in ("budget", "both")
    threshold_capped = params.termination_mode in ("gain_threshold", "both")
    cap = math.ceil(params.touched_budget * total_connections) if budget_capped else None

    touched = examined = moves = 0
    stop_reason = "exhausted"
    for idx in cross:
        if cap is not None and touched >= cap:
            stop_reason = "budget"
            break
        touched += 1
        u, v = int(ca[idx]), int(cb[idx])
        c, d = int(host[u]), int(host[v])
        if c == d:
            continue
        examined += 1
        gains = _pair_gains(u, v, host, psi, graph, P, alpha, cost_scale, params.delta_mode)
        case, gain = gains.best()
        target = None
        if case == "move_u":
            host[u] = target = d
        elif case == "move_v":
            host[v] = target = c
        elif case == "move_both":
            target = gains.best_third_cloud
            host[u] = host[v] = target
        if case != "keep":
            moves += 1
        if telemetry is not None:
            telemetry.write(json.dumps({
                "event": "examine", "u": u, "v": v, "weight": float(cw[idx]),
                "case": case, "gain": gain,
                "target": target,
            }) + "\n")
        if threshold_capped and gain < params.min_gain:
            stop_reason = "gain_threshold"
            break
    if telemetry is not None:
        telemetry.write(json.dumps({
            "event": "summary", "touched": touched, "examined": examined,
            "moves": moves, "stop_reason": stop_reason,
            "total_connections": int(total_connections),
        }) + "\n")
    return Assignment(host)


def brute_force_optimal(graph, model, params, cap=10_000_000):
    """Exhaustive search over all cloud assignments.

    Refuses instances whose search space n_clouds ** n_users exceeds cap.
    Ties return the lexicographically smallest assignment vector.
    """
    n = graph.n_users
    C = model.n_clouds
    if n == 0:
        return Assignment(np.empty(0, dtype=np.int64))
    space = C ** n
    if space > cap:
        raise SearchSpaceError(
            f"search space {C}^{n} = {space} exceeds cap {cap}"
        )
    psi = preference_matrix(graph, model, normalized=params.use_normalized)
    src, dst, w = graph.edge_arrays()
    P = model.pricing.matrix
    alpha = params.alpha
    cost_scale = (1.0 - alpha) * params.cost_weight
    powers = C ** np.arange(n - 1, -1, -1, dtype=np.int64)
    users = np.arange(n)

    best_val = -np.inf
    best = None
    chunk = 1 << 16
    for start in range(0, space, chunk):
        idx = np.arange(start, min(start + chunk, space), dtype=np.int64)
        digits = (idx[:, None] // powers) % C
        pref = psi[users[None, :], digits].sum(axis=1)
        cost = np.zeros(idx.size)
        for s, t, we in zip(src, dst, w):
            cost += P[digits[:, s], digits[:, t]] * we
        vals = alpha * pref - cost_scale * cost
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best = digits[i]
    return Assignment(best)


def baseline_random(graph, model, rng_seed):
    """Uniform random cloud per user; deterministic for a fixed seed."""
    rng = np.random.default_rng(rng_seed)
    return Assignment(rng.integers(0, model.n_clouds, size=graph.n_users, dtype=np.int64))


def baseline_max_preference(graph, model):
    """Every user on its most-preferred cloud, replication cost ignored."""
    return initial_hosting(graph, model)


def baseline_min_propagation(graph, model):
    """Zero cross-cloud traffic: co-host each connected social component.

    Every component lands on the cloud with the largest summed normalized
    preference of its members (lowest cloud id on ties), so no connection
    ever crosses clouds.
    """
    n = graph.n_users
    off, nbr, _, _ = graph.friend_csr()
    adj = csr_matrix((np.ones(nbr.size), nbr, off), shape=(n, n))
    n_comp, comp = connected_components(adj, directed=False)
    psi = preference_matrix(graph, model, normalized=True)
    totals = np.zeros((n_comp, model.n_clouds))
    np.add.at(totals, comp, psi)
    comp_cloud = np.argmax(totals, axis=1)
    return Assignment(comp_cloud[comp])
