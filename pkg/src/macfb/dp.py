"""Dynamic programs over belief states.

Three solvers:

* solve_horizon: finite-horizon maximisation of the per-step weighted
  information reward over augmented states, with memoised backward
  recursion and an argmax policy tree.
* solve_dsaht: finite-horizon minimisation of the terminal decoding-error
  probability; the state is the common belief alone.
* solve_stationary: average-reward relative value iteration on a simplex
  grid of common beliefs with fully refined private tables.

All argmax/argmin ties break toward the lexicographically smallest action,
so results are reproducible bit for bit across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .belief import (
    MASS_EPS,
    AugmentedState,
    JointBelief,
    initial_state,
    observation_distribution,
    predictive_distribution,
    update_augmented,
    update_joint,
)
from .channel import Channel, MessageSpace
from .encoding import (
    DEFAULT_ACTION_CAP,
    EncoderAction,
    PolicyTree,
    enumerate_actions,
    prune_actions,
)
from .errors import GridTooLarge, HorizonTooDeep
from .reward import LambdaWeights, reward_reduced, reward_weighted

DEFAULT_NODE_CAP = 1_000_000
DEFAULT_GRID_CAP = 500_000
DEFAULT_STATIONARY_ITERS = 500

# memo keys quantise each belief coordinate to this granularity
QUANT = 1e-9


def _quantized(arr: np.ndarray) -> bytes:
    return np.rint(arr / QUANT).astype(np.int64).tobytes()


def _state_key(t: int, state: AugmentedState) -> tuple:
    return (
        t,
        _quantized(state.pi.table),
        _quantized(state.beta1.rows),
        _quantized(state.beta2.rows),
    )


@dataclass
class HorizonResult:
    value_per_step: float
    total_value: float
    policy: PolicyTree
    states_expanded: int
    cache_hits: int


@dataclass
class DsahtResult:
    error_probability: float
    policy: PolicyTree
    decoder: dict  # terminal output history -> best-guess message pair


@dataclass
class StationaryResult:
    gain: float
    value_table: dict  # grid composition tuple -> relative value
    iterations: int
    span_at_stop: float
    converged: bool
    resolution: int
    renewal: str


@dataclass
class ReductionReport:
    """Probe of the claim that the common belief alone determines rewards."""

    n_states: int
    n_groups: int
    conflicts: list
    root_action_injective: bool
    nodes: list = field(default_factory=list)

    @property
    def has_conflicts(self) -> bool:
        return bool(self.conflicts)


def _estimated_nodes(n_outputs: int, depth: int) -> int:
    return sum(n_outputs**t for t in range(depth))


def solve_horizon(
    channel: Channel,
    space: MessageSpace,
    weights: LambdaWeights,
    n: int,
    start: AugmentedState = None,
    prune: bool = False,
    action_cap: int = DEFAULT_ACTION_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> HorizonResult:
    """Best n-step average weighted reward and an achieving policy tree.

    Backward recursion over augmented states memoised on (step, quantised
    state); branches whose predictive mass is at or below 1e-15 are skipped.
    With ``prune`` the per-state action list is first collapsed to merge
    representatives, which never changes the value.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    est = _estimated_nodes(channel.n_outputs, n)
    if est > node_cap:
        raise HorizonTooDeep(est, node_cap)
    if start is None:
        start = initial_state(space)
    actions = enumerate_actions(space, channel.alphabets, cap=action_cap)
    n_y = channel.n_outputs
    memo = {}
    stats = {"expanded": 0, "hits": 0}

    def value(t: int, state: AugmentedState) -> float:
        if t > n:
            return 0.0
        key = _state_key(t, state)
        hit = memo.get(key)
        if hit is not None:
            stats["hits"] += 1
            return hit[0]
        stats["expanded"] += 1
        candidates = prune_actions(actions, state, channel, weights) if prune else actions
        best_value = -math.inf
        best_action = None
        for action in candidates:
            total = reward_weighted(state, action, channel, weights).weighted
            if t < n:
                p = observation_distribution(state, action, channel)
                for y in range(n_y):
                    if p[y] > MASS_EPS:
                        total += p[y] * value(t + 1, update_augmented(state, action, y, channel))
            if total > best_value:
                best_value = total
                best_action = action
        memo[key] = (best_value, best_action)
        return best_value

    total = value(1, start)
    policy = _extract_argmax_tree(channel, memo, start, n, actions[0])
    return HorizonResult(total / n, total, policy, stats["expanded"], stats["hits"])


def _extract_argmax_tree(
    channel: Channel, memo: dict, start: AugmentedState, depth: int, default: EncoderAction
) -> PolicyTree:
    nodes = {}

    def walk(t, state, hist):
        if t > depth:
            return
        _, action = memo[_state_key(t, state)]
        nodes[hist] = action
        p = observation_distribution(state, action, channel)
        for y in range(channel.n_outputs):
            if p[y] > MASS_EPS:
                walk(t + 1, update_augmented(state, action, y, channel), hist + (y,))

    walk(1, start, ())
    # unreachable histories never execute; pad them so the tree is complete
    for t in range(1, depth + 1):
        for hist in itertools.product(range(channel.n_outputs), repeat=t - 1):
            nodes.setdefault(hist, default)
    return PolicyTree(depth, channel.n_outputs, nodes)


def evaluate_tree(
    channel: Channel,
    space: MessageSpace,
    tree: PolicyTree,
    weights: LambdaWeights,
    start: AugmentedState = None,
) -> float:
    """Per-step weighted reward of a fixed policy tree via the belief recursion.

    This is the solver-side counterpart of the trajectory oracle: it averages
    reward_weighted over the reachable augmented states, weighted by the
    probability of the output history that reaches them.
    """
    if tree.depth < 1:
        raise ValueError("policy tree must have depth >= 1")
    if start is None:
        start = initial_state(space)
    acc = 0.0

    def walk(t, state, hist, mass):
        nonlocal acc
        if t > tree.depth:
            return
        action = tree.action_at(hist)
        acc += mass * reward_weighted(state, action, channel, weights).weighted
        p = observation_distribution(state, action, channel)
        for y in range(channel.n_outputs):
            if p[y] > MASS_EPS:
                walk(t + 1, update_augmented(state, action, y, channel), hist + (y,), mass * p[y])

    walk(1, start, (), 1.0)
    return acc / tree.depth


def solve_dsaht(
    channel: Channel,
    space: MessageSpace,
    horizon: int,
    prior: JointBelief = None,
    action_cap: int = DEFAULT_ACTION_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> DsahtResult:
    """Minimise the probability that a best-guess decoder errs after T uses.

    Only the common belief matters here; the cost-to-go of a terminal belief
    is one minus its largest entry and interior steps average it under the
    predictive output distribution.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if prior is None:
        prior = initial_state(space).pi
    if horizon == 0:
        return DsahtResult(
            1.0 - float(prior.table.max()),
            PolicyTree(0, channel.n_outputs, {}),
            {(): prior.argmax_pair()},
        )
    est = _estimated_nodes(channel.n_outputs, horizon)
    if est > node_cap:
        raise HorizonTooDeep(est, node_cap)
    actions = enumerate_actions(space, channel.alphabets, cap=action_cap)
    n_y = channel.n_outputs
    memo = {}

    def cost(t: int, pi: JointBelief) -> float:
        if t > horizon:
            return 1.0 - float(pi.table.max())
        key = (t, _quantized(pi.table))
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        best_cost = math.inf
        best_action = None
        for action in actions:
            p = predictive_distribution(pi, action, channel)
            expected = 0.0
            for y in range(n_y):
                if p[y] > MASS_EPS:
                    expected += p[y] * cost(t + 1, update_joint(pi, action, y, channel))
            if expected < best_cost:
                best_cost = expected
                best_action = action
        memo[key] = (best_cost, best_action)
        return best_cost

    error = cost(1, prior)

    nodes = {}
    decoder = {}

    def walk(t, pi, hist):
        if t > horizon:
            decoder[hist] = pi.argmax_pair()
            return
        _, action = memo[(t, _quantized(pi.table))]
        nodes[hist] = action
        p = predictive_distribution(pi, action, channel)
        for y in range(n_y):
            if p[y] > MASS_EPS:
                walk(t + 1, update_joint(pi, action, y, channel), hist + (y,))

    walk(1, prior, ())
    for t in range(1, horizon + 1):
        for hist in itertools.product(range(n_y), repeat=t - 1):
            nodes.setdefault(hist, actions[0])
    return DsahtResult(error, PolicyTree(horizon, n_y, nodes), decoder)


# ---------------------------------------------------------------------------
# stationary solver


def _compositions(total: int, parts: int):
    """All length-``parts`` tuples of non-negative ints summing to ``total``,
    in lexicographic order."""
    if parts == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            out.append((head,) + tail)
    return out


def _nearest_composition(scaled: np.ndarray, d: int) -> tuple:
    base = np.floor(scaled).astype(int)
    base = np.clip(base, 0, d)
    rem = d - int(base.sum())
    frac = scaled - base
    if rem > 0:
        for j in np.argsort(-frac, kind="stable")[:rem]:
            base[j] += 1
    elif rem < 0:
        for j in np.argsort(frac, kind="stable")[: -rem]:
            base[j] -= 1
    return tuple(int(v) for v in base)


class _SimplexInterpolator:
    """Barycentric weights over the standard triangulation of the d-grid.

    Beliefs are mapped through cumulative coordinates; the cell containing a
    point is the simplex of the triangulation picked by sorting fractional
    parts, which keeps every returned vertex inside the simplex grid. Falls
    back to the nearest grid point if rounding ever produces an invalid
    vertex.
    """

    def __init__(self, d: int, parts: int, index_of: dict):
        self.d = d
        self.parts = parts
        self.index_of = index_of

    def weights(self, flat_belief: np.ndarray):
        d, parts = self.d, self.parts
        if parts == 1:
            return [self.index_of[(d,)]], [1.0]
        suffix = np.cumsum(flat_belief[::-1])[::-1]
        z = np.clip(d * suffix[1:], 0.0, float(d))
        z = np.minimum.accumulate(z)
        base = np.floor(z)
        frac = z - base
        order = np.argsort(-frac, kind="stable")
        fs = frac[order]
        verts = [base]
        for j in order:
            nxt = verts[-1].copy()
            nxt[j] += 1.0
            verts.append(nxt)
        idxs, ws = [], []
        for level, vert in enumerate(verts):
            if level == 0:
                w = 1.0 - fs[0]
            elif level < parts - 1:
                w = fs[level - 1] - fs[level]
            else:
                w = fs[-1]
            if w <= 1e-12:
                continue
            comp = self._to_composition(vert)
            idx = self.index_of.get(comp)
            if idx is None:
                comp = _nearest_composition(d * flat_belief, d)
                return [self.index_of[comp]], [1.0]
            idxs.append(idx)
            ws.append(float(w))
        if not idxs:
            comp = _nearest_composition(d * flat_belief, d)
            return [self.index_of[comp]], [1.0]
        return idxs, ws

    def _to_composition(self, vert: np.ndarray):
        d = self.d
        parts = self.parts
        comp = [d - vert[0]]
        for j in range(1, parts - 1):
            comp.append(vert[j - 1] - vert[j])
        comp.append(vert[-1])
        out = tuple(int(round(c)) for c in comp)
        if any(c < 0 for c in out) or sum(out) != d:
            return None
        return out


def solve_stationary(
    channel: Channel,
    space: MessageSpace,
    weights: LambdaWeights,
    resolution: int,
    epsilon: float = 1e-6,
    max_iters: int = DEFAULT_STATIONARY_ITERS,
    prior: JointBelief = None,
    renewal: str = "per_use",
    grid_cap: int = DEFAULT_GRID_CAP,
    action_cap: int = DEFAULT_ACTION_CAP,
) -> StationaryResult:
    """Relative value iteration for the long-run average weighted reward.

    The grid holds every belief with coordinates k/resolution; off-grid
    beliefs are evaluated by barycentric interpolation and the update is
    recentred at the uniform belief, whose update value is the gain
    estimate. Iteration stops when the span of successive differences
    falls below epsilon; running out of iterations is reported through the
    ``converged`` flag rather than an exception, with the partial result
    kept.

    renewal="per_use" (default): every channel use carries a fresh message
    pair drawn from the initial belief, so the continuation restarts there.
    This models a sender pipeline that never runs out of new data and makes
    the gain the sustainable per-use information rate; on point-to-point
    embeddings it reproduces the single-letter channel value at the message
    granularity.

    renewal="none": plain Bayes successors on a fixed message pair. The
    total extractable information is then bounded by the initial entropy,
    so the gain is 0 for every channel; this mode exists to make that
    degeneracy observable.
    """
    if renewal not in ("per_use", "none"):
        raise ValueError(f"unknown renewal mode {renewal!r}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if prior is None:
        prior = initial_state(space).pi
    parts = space.pairs
    comps = _compositions(resolution, parts)
    n_points = len(comps)
    if n_points > grid_cap:
        raise GridTooLarge(n_points, grid_cap)
    index_of = {c: i for i, c in enumerate(comps)}
    interp = _SimplexInterpolator(resolution, parts, index_of)
    actions = enumerate_actions(space, channel.alphabets, cap=action_cap)
    n_actions = len(actions)
    n_y = channel.n_outputs

    beliefs = [
        JointBelief(np.asarray(c, dtype=float).reshape(space.m1, space.m2) / resolution)
        for c in comps
    ]
    rewards = np.array(
        [
            [reward_reduced(b, a, channel, weights).weighted for a in actions]
            for b in beliefs
        ]
    )

    # successor structure as COO triples over the flattened (state, action) axis
    rows, cols, vals = [], [], []
    if renewal == "per_use":
        start_idx, start_w = interp.weights(prior.table.reshape(-1))
        for flat in range(n_points * n_actions):
            for idx, w in zip(start_idx, start_w):
                rows.append(flat)
                cols.append(idx)
                vals.append(w)
    else:
        for i, b in enumerate(beliefs):
            for a_i, action in enumerate(actions):
                flat = i * n_actions + a_i
                p = predictive_distribution(b, action, channel)
                for y in range(n_y):
                    if p[y] <= MASS_EPS:
                        continue
                    succ = update_joint(b, action, y, channel)
                    idxs, ws = interp.weights(succ.table.reshape(-1))
                    for idx, w in zip(idxs, ws):
                        rows.append(flat)
                        cols.append(idx)
                        vals.append(float(p[y]) * w)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)

    uniform = np.full(parts, 1.0 / parts)
    ref_idx, ref_w = interp.weights(uniform)
    ref_idx = np.asarray(ref_idx, dtype=np.int64)
    ref_w = np.asarray(ref_w, dtype=float)

    flat_rewards = rewards.reshape(-1)
    value = np.zeros(n_points)
    gain = 0.0
    span = math.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        acc = np.zeros(n_points * n_actions)
        np.add.at(acc, rows, vals * value[cols])
        updated = (flat_rewards + acc).reshape(n_points, n_actions).max(axis=1)
        gain = float(updated[ref_idx] @ ref_w)
        updated = updated - gain
        diff = updated - value
        span = float(diff.max() - diff.min())
        value = updated
        if span < epsilon:
            converged = True
            break

    table = {comp: float(v) for comp, v in zip(comps, value)}
    return StationaryResult(gain, table, iterations, span, converged, resolution, renewal)


# ---------------------------------------------------------------------------
# reachability diagnostic


def reachability_diagnostic(
    channel: Channel,
    space: MessageSpace,
    weights: LambdaWeights,
    n: int,
    start: AugmentedState = None,
    action_cap: int = DEFAULT_ACTION_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> ReductionReport:
    """Probe whether the common belief alone pins down rewards on-policy.

    Solves the horizon program, enumerates the augmented states reachable
    under its argmax tree, groups states whose joint beliefs agree within
    1e-9 entrywise, and reports every action whose weighted reward differs
    across the group by more than 1e-9. Purely informational; conflicts are
    evidence that the private tables still matter on this instance.
    """
    if start is None:
        start = initial_state(space)
    result = solve_horizon(
        channel, space, weights, n, start, action_cap=action_cap, node_cap=node_cap
    )
    tree = result.policy
    actions = enumerate_actions(space, channel.alphabets, cap=action_cap)

    reached = []

    def walk(t, state, hist):
        if t > n:
            return
        reached.append((t, hist, state))
        action = tree.action_at(hist)
        p = observation_distribution(state, action, channel)
        for y in range(channel.n_outputs):
            if p[y] > MASS_EPS:
                walk(t + 1, update_augmented(state, action, y, channel), hist + (y,))

    walk(1, start, ())

    groups = {}
    for t, hist, state in reached:
        groups.setdefault(_quantized(state.pi.table), []).append((t, hist, state))

    conflicts = []
    for members in groups.values():
        for (t_a, hist_a, state_a), (t_b, hist_b, state_b) in itertools.combinations(members, 2):
            if np.max(np.abs(state_a.pi.table - state_b.pi.table)) > 1e-9:
                continue
            for a_i, action in enumerate(actions):
                r_a = reward_weighted(state_a, action, channel, weights).weighted
                r_b = reward_weighted(state_b, action, channel, weights).weighted
                if abs(r_a - r_b) > 1e-9:
                    conflicts.append(
                        {
                            "history_a": hist_a,
                            "history_b": hist_b,
                            "t_a": t_a,
                            "t_b": t_b,
                            "action_index": a_i,
                            "reward_gap": abs(r_a - r_b),
                        }
                    )

    root = tree.action_at(())
    injective = len(set(root.e1.table)) == space.m1 and len(set(root.e2.table)) == space.m2
    return ReductionReport(
        n_states=len(reached),
        n_groups=len(groups),
        conflicts=conflicts,
        root_action_injective=injective,
        nodes=[(t, hist) for t, hist, _ in reached],
    )
