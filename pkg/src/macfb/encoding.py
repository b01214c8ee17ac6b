"""Partial encoding functions, joint encoder actions and policy trees.

An action assigns one input symbol to every message of each sender. A
policy tree fixes one action per output history, i.e. it is a complete
|Y|-ary tree of some depth; the node for step t is addressed by the
history y_1..y_{t-1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import Alphabets, Channel, MessageSpace
from .errors import ActionSpaceTooLarge
from .reward import LambdaWeights, reward_weighted
from . import belief as _belief

DEFAULT_ACTION_CAP = 1_000_000

# merge tolerance for state-local action pruning
PRUNE_TOL = 1e-12


@dataclass(frozen=True, order=True)
class EncoderFunction:
    """Map from one sender's messages into its input alphabet."""

    table: tuple
    n_symbols: int

    def __post_init__(self):
        if len(self.table) < 1:
            raise ValueError("encoder table must cover at least one message")
        for sym in self.table:
            if not isinstance(sym, int) or not 0 <= sym < self.n_symbols:
                raise ValueError(f"symbol {sym!r} outside alphabet of size {self.n_symbols}")

    def __call__(self, message: int) -> int:
        return self.table[message]

    @property
    def n_messages(self) -> int:
        return len(self.table)


@dataclass(frozen=True, order=True)
class EncoderAction:
    """One encoding function per sender, applied in the same channel use."""

    e1: EncoderFunction
    e2: EncoderFunction


class PolicyTree:
    """Complete assignment of encoder actions to output histories.

    ``nodes`` maps a history tuple (y_1, ..., y_{t-1}) to the action used at
    step t; depth n therefore needs sum_{t=0}^{n-1} |Y|^t nodes. Depth 0 is
    the empty tree (no channel uses).
    """

    def __init__(self, depth: int, n_outputs: int, nodes: dict):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        if n_outputs < 1:
            raise ValueError("n_outputs must be >= 1")
        self.depth = int(depth)
        self.n_outputs = int(n_outputs)
        self.nodes = dict(nodes)
        expected = sum(n_outputs**t for t in range(depth))
        if len(self.nodes) != expected:
            raise ValueError(f"expected {expected} nodes for depth {depth}, got {len(self.nodes)}")
        for hist in self.nodes:
            if len(hist) >= depth or any(not 0 <= y < n_outputs for y in hist):
                raise ValueError(f"history {hist!r} invalid for depth {depth}")

    def action_at(self, history: Sequence[int]) -> EncoderAction:
        return self.nodes[tuple(history)]

    def items(self):
        """Nodes in deterministic (t, history) order."""
        return sorted(self.nodes.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __eq__(self, other):
        return (
            isinstance(other, PolicyTree)
            and self.depth == other.depth
            and self.n_outputs == other.n_outputs
            and self.nodes == other.nodes
        )


def _digits(values: Iterable[int]) -> str:
    out = []
    for v in values:
        if not 0 <= v <= 9:
            raise ValueError("digit-string serialisation supports alphabet sizes up to 10")
        out.append(str(v))
    return "".join(out)


def policy_to_csv(tree: PolicyTree) -> str:
    """Render a tree as CSV rows t,history,e1,e2 with digit-string fields."""
    lines = ["t,history,e1,e2"]
    for hist, action in tree.items():
        lines.append(
            f"{len(hist) + 1},{_digits(hist)},{_digits(action.e1.table)},{_digits(action.e2.table)}"
        )
    return "\n".join(lines) + "\n"


def policy_from_csv(text: str, alphabets: Alphabets) -> PolicyTree:
    """Parse the policy CSV format produced by policy_to_csv."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t,history,e1,e2":
        raise ValueError("missing policy header t,history,e1,e2")
    nodes = {}
    depth = 0
    for ln in lines[1:]:
        t_str, hist_str, e1_str, e2_str = ln.split(",")
        t = int(t_str)
        hist = tuple(int(ch) for ch in hist_str)
        if len(hist) != t - 1:
            raise ValueError(f"history {hist_str!r} inconsistent with t={t}")
        action = EncoderAction(
            EncoderFunction(tuple(int(ch) for ch in e1_str), alphabets.x1),
            EncoderFunction(tuple(int(ch) for ch in e2_str), alphabets.x2),
        )
        nodes[hist] = action
        depth = max(depth, t)
    return PolicyTree(depth, alphabets.y, nodes)


def enumerate_actions(
    space: MessageSpace, alphabets: Alphabets, cap: int = DEFAULT_ACTION_CAP
) -> list:
    """All |X1|^|M1| * |X2|^|M2| encoder actions in lexicographic order.

    The order is by (e1.table, e2.table), so the all-zero action comes first
    and downstream argmax tie-breaks are reproducible.
    """
    count = alphabets.x1**space.m1 * alphabets.x2**space.m2
    if count > cap:
        raise ActionSpaceTooLarge(count, cap)
    actions = []
    for t1 in itertools.product(range(alphabets.x1), repeat=space.m1):
        e1 = EncoderFunction(t1, alphabets.x1)
        for t2 in itertools.product(range(alphabets.x2), repeat=space.m2):
            actions.append(EncoderAction(e1, EncoderFunction(t2, alphabets.x2)))
    return actions


def prune_actions(
    actions: Sequence[EncoderAction],
    state,
    channel: Channel,
    weights: LambdaWeights,
) -> list:
    """Drop actions indistinguishable at ``state`` from an earlier action.

    Two actions merge when their weighted rewards agree within 1e-12, their
    observation distributions agree entrywise within 1e-12, and for every
    output carrying mass the successor augmented states agree entrywise
    within 1e-12. The lexicographically smallest representative survives, so
    the result is an order-preserving subsequence of ``actions``.
    """
    kept = []
    signatures = []
    n_y = channel.n_outputs
    for action in actions:
        r = reward_weighted(state, action, channel, weights).weighted
        p = _belief.observation_distribution(state, action, channel)
        succ = [
            _belief.update_augmented(state, action, y, channel) if p[y] > _belief.MASS_EPS else None
            for y in range(n_y)
        ]
        merged = False
        for rep_r, rep_p, rep_succ in signatures:
            if abs(r - rep_r) > PRUNE_TOL:
                continue
            if np.max(np.abs(p - rep_p)) > PRUNE_TOL:
                continue
            if all(
                _same_successor(succ[y], rep_succ[y])
                for y in range(n_y)
            ):
                merged = True
                break
        if not merged:
            kept.append(action)
            signatures.append((r, p, succ))
    return kept


def _same_successor(a, b) -> bool:
    if a is None or b is None:
        # at most 1e-12 of mass distinguishes the branches; treat as equal
        return True
    return (
        np.max(np.abs(a.pi.table - b.pi.table)) <= PRUNE_TOL
        and np.max(np.abs(a.beta1.rows - b.beta1.rows)) <= PRUNE_TOL
        and np.max(np.abs(a.beta2.rows - b.beta2.rows)) <= PRUNE_TOL
    )
