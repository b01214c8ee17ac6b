"""Per-step information rewards, in bits.

The weighted reward combines three one-step mutual informations evaluated
at an augmented belief state under a joint encoder action:

* i3: information the output carries about the input pair;
* i1: information it carries about sender 1's input once sender 2's input
  history is given, computed by partitioning sender 2's messages into
  cells that share a private-belief row and a current symbol;
* i2: the mirror image.

Each equals the expected drop of the matching conditional entropy of the
message belief, which is what ties the per-state recursion to trajectory
averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import AugmentedState, JointBelief, PrivateBeliefTable, observation_distribution
from .channel import Channel
from .errors import NotNormalized

_LN2 = float(np.log(2.0))

# conditioning cells below this mass contribute nothing
WEIGHT_EPS = 1e-15

# private rows from identical input histories agree to this tolerance
ROW_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class LambdaWeights:
    """Non-negative weights (l1, l2, l3) on the three reward components."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {v!r}")

    def normalized(self) -> "LambdaWeights":
        s = self.l1 + self.l2 + self.l3
        if s <= 0.0:
            raise ValueError("cannot normalise all-zero weights")
        return LambdaWeights(self.l1 / s, self.l2 / s, self.l3 / s)

    def as_tuple(self) -> tuple:
        return (self.l1, self.l2, self.l3)

    def scaled(self, c: float) -> "LambdaWeights":
        return LambdaWeights(c * self.l1, c * self.l2, c * self.l3)


@dataclass(frozen=True)
class RewardBreakdown:
    i1: float
    i2: float
    i3: float
    weighted: float


def entropy(p) -> float:
    """Shannon entropy in bits with the 0 log 0 = 0 convention."""
    arr = np.asarray(p, dtype=float)
    total = float(arr.sum())
    if abs(total - 1.0) > 1e-9:
        raise NotNormalized(total)
    pos = arr[arr > 0.0]
    return float(-np.sum(pos * np.log(pos)) / _LN2)


def _column_entropies(cols: np.ndarray) -> np.ndarray:
    """Entropy in bits of each column of a (Y, N) stochastic array."""
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(cols > 0.0, cols * np.log(cols), 0.0)
    return -plogp.sum(axis=0) / _LN2


def reward_i3(state: AugmentedState, action, channel: Channel) -> float:
    """I(X1, X2; Y) at the current belief: output entropy minus noise entropy."""
    pred = observation_distribution(state, action, channel)
    lik = channel.kernel[
        np.ix_(
            np.arange(channel.n_outputs),
            np.asarray(action.e1.table),
            np.asarray(action.e2.table),
        )
    ]
    cond = _column_entropies(lik.reshape(channel.n_outputs, -1)).reshape(state.pi.table.shape)
    return entropy(pred) - float((state.pi.table * cond).sum())


def _partition_cells(rows: np.ndarray, symbols) -> list:
    """Group messages whose private rows match entrywise and whose current
    symbol coincides; these are exactly the cells an input-history observer
    can tell apart."""
    cells = []
    for m in range(rows.shape[0]):
        for cell in cells:
            rep = cell[0]
            if symbols[m] == symbols[rep] and np.max(np.abs(rows[m] - rows[rep])) <= ROW_MATCH_TOL:
                cell.append(m)
                break
        else:
            cells.append([m])
    return cells


def _one_sided(pi_own_first: np.ndarray, other_rows: np.ndarray, other_symbols,
               kernel_cols) -> float:
    """Shared core of i1 and i2.

    pi_own_first: joint belief with the *informing* sender on axis 0 and the
    conditioned sender on axis 1. kernel_cols(x_other) must return the
    (Y, M_own) table Q(y | own message, fixed other symbol).
    """
    total = 0.0
    for cell in _partition_cells(other_rows, other_symbols):
        block = pi_own_first[:, cell]
        w = float(block.sum())
        if w <= WEIGHT_EPS:
            continue
        own_weights = block.sum(axis=1) / w
        cols = kernel_cols(other_symbols[cell[0]])
        mix = cols @ own_weights
        cond = float(own_weights @ _column_entropies(cols))
        total += w * (entropy(mix) - cond)
    return total


def reward_i1(state: AugmentedState, action, channel: Channel) -> float:
    """I(X1; Y | X2 input history) at the current belief, averaged over the
    conditioning cells of sender 2."""
    e1 = np.asarray(action.e1.table)
    return _one_sided(
        state.pi.table,
        state.beta2.rows,
        action.e2.table,
        lambda x2: channel.kernel[:, e1, x2],
    )


def reward_i2(state: AugmentedState, action, channel: Channel) -> float:
    """Mirror of reward_i1 with the senders swapped."""
    e2 = np.asarray(action.e2.table)
    return _one_sided(
        state.pi.table.T,
        state.beta1.rows,
        action.e1.table,
        lambda x1: channel.kernel[:, x1, e2],
    )


def reward_weighted(state: AugmentedState, action, channel: Channel,
                    weights: LambdaWeights) -> RewardBreakdown:
    i1 = reward_i1(state, action, channel)
    i2 = reward_i2(state, action, channel)
    i3 = reward_i3(state, action, channel)
    return RewardBreakdown(i1, i2, i3, weights.l1 * i1 + weights.l2 * i2 + weights.l3 * i3)


def reward_reduced(pi: JointBelief, action, channel: Channel,
                   weights: LambdaWeights) -> RewardBreakdown:
    """Weighted reward at a state whose private tables are point masses.

    This is the fully-refined regime: each sender's input history separates
    every message, so i1 conditions on m2 exactly and i2 on m1 exactly.
    """
    state = AugmentedState(
        pi,
        PrivateBeliefTable(np.eye(pi.m1)),
        PrivateBeliefTable(np.eye(pi.m2)),
    )
    return reward_weighted(state, action, channel, weights)
