"""Top-K most probable Boolean revision masks for a flip-probability sequence.

Each position u carries an independent probability ``pb[u]`` that the
predicted symbol there is wrong, so a mask's probability is the product of
``pb[u]`` (position marked as a hole) or ``1 - pb[u]`` (position kept) over
all positions.  The K most probable masks are enumerated lazily:

* The single most probable mask marks exactly the positions with
  ``pb > 0.5``.  Every other mask is reached from it by "flipping" positions
  away from that state, and each flip multiplies the probability by a fixed
  per-position ratio <= 1.
* Positions are pre-sorted by ascending flip cost (descending ratio).  A
  min-heap of candidate flip sets is expanded with the classic
  duplicate-free append/shift successor rule: a node whose flip set has
  frontier rank r spawns one child that additionally flips rank r and one
  child that moves its last flipped rank up to r.  Every flip set is
  generated exactly once, so no emitted mask ever needs a duplicate check.
* Each emission costs at most two heap adjustments (one ``heapreplace`` for
  the first child, one push for the second), keeping the total heap work at
  2K + O(1) operations for K masks regardless of sequence length.

All probability arithmetic is carried in the log domain.  Ordering ties
(equal log-probability) break deterministically: fewer flipped positions
first, then the lexicographically smallest set of flipped positions.
Per-mask log-probabilities are accumulated with ``math.fsum``, which is
order-independent, so an oracle that recomputes a mask's cost from scratch
sees bit-identical keys and therefore the identical order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .core import ContractViolation, RevisionMask

# Probabilities are clamped away from 0 and 1 before entering the log domain.
CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class ScoredMask:
    """A revision mask together with its log-probability."""

    mask: RevisionMask
    log_prob: float

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob)


@dataclass(frozen=True)
class FlipRanking:
    """Positions ordered by descending flip ratio (ascending flip cost)."""

    order: tuple[int, ...]
    log_costs: tuple[float, ...]  # log of the flip ratio per rank, all <= 0


@dataclass
class EnumerationCounters:
    """Instrumentation filled in by :func:`top_k_masks`."""

    heap_ops: int = 0
    duplicate_checks: int = 0
    nodes_created: int = 0


@dataclass(frozen=True)
class EnumeratorNode:
    """Internal search node: a set of flipped ranks plus its frontier."""

    flip_ranks: tuple[int, ...]
    next_rank: int
    log_prob: float


def clamp_probs(pb) -> list[float]:
    """Validate entries in [0, 1] and clamp them into [eps, 1 - eps]."""
    out = []
    for p in pb:
        p = float(p)
        if math.isnan(p) or p < 0.0 or p > 1.0:
            raise ContractViolation(f"flip probability {p} outside [0, 1]")
        out.append(min(max(p, CLAMP_EPS), 1.0 - CLAMP_EPS))
    return out


def _branches(pb) -> tuple[list[float], list[float]]:
    """Per-position probability of the True branch and the False branch."""
    true_branch = clamp_probs(pb)
    false_branch = [1.0 - p for p in true_branch]
    return true_branch, false_branch


def initial_mask(pb) -> ScoredMask:
    """The single most probable mask: True exactly where pb > 0.5."""
    t, f = _branches(pb)
    mask = tuple(p > 0.5 for p in t)
    log_prob = math.fsum(math.log(max(ti, fi)) for ti, fi in zip(t, f))
    return ScoredMask(mask, log_prob)


def flip_ranking(pb) -> FlipRanking:
    """Rank positions by how cheaply they can be flipped away from the
    initial state; ties break by ascending position index."""
    t, f = _branches(pb)
    costs = [math.log(max(ti, fi)) - math.log(min(ti, fi)) for ti, fi in zip(t, f)]
    order = sorted(range(len(costs)), key=lambda u: (costs[u], u))
    return FlipRanking(tuple(order), tuple(-costs[u] for u in order))


def seq_log_prob(pb, mask: RevisionMask) -> float:
    """Log-probability of a specific mask under independent flip probabilities."""
    if len(pb) != len(mask):
        raise ContractViolation(
            f"length mismatch: {len(pb)} probabilities vs {len(mask)} mask bits"
        )
    t, f = _branches(pb)
    return math.fsum(math.log(t[u] if mask[u] else f[u]) for u in range(len(mask)))


def top_k_masks(pb, k: int, counters: EnumerationCounters | None = None) -> list[ScoredMask]:
    """Return min(k, 2^l) distinct masks in non-increasing probability order.

    ``k`` larger than the number of distinct masks silently truncates.  The
    optional ``counters`` object is filled with instrumentation totals.
    """
    if k < 1:
        raise ContractViolation("k must be >= 1")
    if counters is None:
        counters = EnumerationCounters()

    t, f = _branches(pb)
    l = len(t)
    base_bits = [ti > 0.5 for ti in t]
    base_log = math.fsum(math.log(max(ti, fi)) for ti, fi in zip(t, f))

    costs = [math.log(max(ti, fi)) - math.log(min(ti, fi)) for ti, fi in zip(t, f)]
    ranks = sorted(range(l), key=lambda u: (costs[u], u))
    rank_cost = [costs[u] for u in ranks]
    rank_pos = ranks

    def make_entry(flip_ranks: tuple[int, ...]):
        # fsum is order-independent, so equal flip-cost multisets always
        # produce identical keys no matter how the set was reached.
        cost = math.fsum(rank_cost[r] for r in flip_ranks)
        positions = tuple(sorted(rank_pos[r] for r in flip_ranks))
        next_rank = flip_ranks[-1] + 1 if flip_ranks else 0
        log_prob = math.fsum([base_log] + [-rank_cost[r] for r in flip_ranks])
        counters.nodes_created += 1
        return (cost, len(flip_ranks), positions, EnumeratorNode(flip_ranks, next_rank, log_prob))

    def materialize(positions: tuple[int, ...]) -> RevisionMask:
        bits = list(base_bits)
        for u in positions:
            bits[u] = not bits[u]
        return tuple(bits)

    heap = [make_entry(())]
    counters.heap_ops += 1
    out: list[ScoredMask] = []
    while heap and len(out) < k:
        _, _, positions, node = heap[0]
        out.append(ScoredMask(materialize(positions), node.log_prob))
        nr = node.next_rank
        children = []
        if nr < l:
            # Append: additionally flip the frontier rank.
            children.append(make_entry(node.flip_ranks + (nr,)))
            if node.flip_ranks:
                # Shift: move the most recently flipped rank up to the
                # frontier.  Both children cost at least as much as the
                # parent because ranks are sorted by ascending flip cost
                # and float rounding is monotone.
                children.append(make_entry(node.flip_ranks[:-1] + (nr,)))
        if children:
            heapq.heapreplace(heap, children[0])
            counters.heap_ops += 1
            if len(children) == 2:
                heapq.heappush(heap, children[1])
                counters.heap_ops += 1
        else:
            heapq.heappop(heap)
            counters.heap_ops += 1
    return out
