"""Dual-objective path finding and mission-level task ordering.

Two planners over the same graph: one minimises travelled distance, one
maximises the product of per-edge effective success probabilities.  Both
resolve ties deterministically so repeated runs return byte-identical
plans: equal-cost candidates are ordered by (objective, then distance for
the probability planner, then the node sequence itself).
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from dataclasses import dataclass

from .env import EnvironmentGraph, HeatedGraph, MissionSpec


@dataclass(frozen=True)
class Path:
    """A concrete node walk with its accumulated objectives.

    total_distance and success_probability are accumulated left-to-right
    along nodes, which keeps recomputation bit-stable.
    """

    nodes: tuple
    total_distance: float
    success_probability: float

    def __len__(self):
        return len(self.nodes)


class UnreachableNodeError(ValueError):
    """A mission references a node no path can reach."""


def path_from_nodes(g, nodes):
    """Build a Path from an explicit node sequence.

    Every consecutive pair must be an edge of g; raises ValueError naming
    the missing pair otherwise.
    """
    nodes = tuple(nodes)
    if not nodes:
        raise ValueError("empty node sequence")
    for n in nodes:
        g.check_node(n)
    dist = 0.0
    prob = 1.0
    for a, b in zip(nodes, nodes[1:]):
        edge = g.edge(a, b)
        if edge is None:
            raise ValueError(f"no edge between {a} and {b}")
        dist = dist + edge.distance
        prob = prob * g.effective(edge)
    return Path(nodes, dist, prob)


def _cache_for(g, kind):
    base = g.base if isinstance(g, HeatedGraph) else g
    return base._path_cache.setdefault(kind, {})


def shortest_distance_path(g, start, goal):
    """Minimum-distance path from start to goal, or None if unreachable.

    Among equal-distance paths the lexicographically smallest node
    sequence wins.  Heat overlays never change distances, so the search
    runs on the base graph and only the probability annotation is
    recomputed against g.
    """
    g.check_node(start)
    g.check_node(goal)
    if isinstance(g, HeatedGraph):
        found = shortest_distance_path(g.base, start, goal)
        return path_from_nodes(g, found.nodes) if found is not None else None

    cache = _cache_for(g, "dist")
    hit = cache.get((start, goal))
    if hit is not None or (start, goal) in cache:
        return hit

    best = None
    done = set()
    heap = [(0.0, (start,))]
    while heap:
        dist, seq = heapq.heappop(heap)
        node = seq[-1]
        if node in done:
            continue
        done.add(node)
        if node == goal:
            best = path_from_nodes(g, seq)
            break
        for nbr, edge in g.neighbors(node):
            if nbr not in done:
                heapq.heappush(heap, (dist + edge.distance, seq + (nbr,)))
    cache[(start, goal)] = best
    return best


def max_success_path(g, start, goal):
    """Maximum effective-success path from start to goal, or None.

    Ties on probability break by smaller total distance, then by the
    lexicographically smallest node sequence.  The heap key carries the
    running product directly (multiplied in path order), so the winner is
    bit-identical to a brute-force enumeration using the same arithmetic.
    """
    g.check_node(start)
    g.check_node(goal)
    cacheable = isinstance(g, EnvironmentGraph)
    if cacheable:
        cache = _cache_for(g, "prob")
        hit = cache.get((start, goal))
        if hit is not None or (start, goal) in cache:
            return hit

    best = None
    done = set()
    heap = [(-1.0, 0.0, (start,))]
    while heap:
        neg_prob, dist, seq = heapq.heappop(heap)
        node = seq[-1]
        if node in done:
            continue
        done.add(node)
        if node == goal:
            best = Path(seq, dist, -neg_prob)
            break
        for nbr, edge in g.neighbors(node):
            if nbr not in done:
                heapq.heappush(heap, ((-neg_prob) * g.effective(edge) * -1.0,
                                      dist + edge.distance, seq + (nbr,)))
    if cacheable:
        cache[(start, goal)] = best
    return best


@dataclass(frozen=True)
class MissionPlan:
    """An ordered visiting plan; ordered_tasks always ends with the
    mission's end node."""

    ordered_tasks: tuple
    legs: tuple
    plan_probability: float
    plan_distance: float


def _compose(legs):
    prob = 1.0
    dist = 0.0
    for leg in legs:
        prob = prob * leg.success_probability
        dist = dist + leg.total_distance
    return prob, dist


def order_tasks(g, mission, from_node):
    """Choose the task visiting order that maximises mission success.

    Exhaustive over all task permutations up to 8 tasks (legs between
    waypoints are memoized max-success paths); beyond 8 a greedy
    nearest-task order is used instead and a warning is emitted.  The end
    node is always appended after the last task.
    """
    g.check_node(from_node)
    waypoints = list(mission.tasks) + [mission.end]
    for t in waypoints:
        g.check_node(t)
        if max_success_path(g, from_node, t) is None:
            kind = "end node" if t == mission.end else "task"
            raise UnreachableNodeError(
                f"{kind} {t} is unreachable from node {from_node}")

    if len(mission.tasks) > 8:
        order = _greedy_order(g, mission, from_node)
    else:
        order = None
        best_key = None
        for perm in itertools.permutations(mission.tasks):
            legs = []
            here = from_node
            for t in perm + (mission.end,):
                legs.append(max_success_path(g, here, t))
                here = t
            prob, dist = _compose(legs)
            key = (-prob, dist, perm)
            if best_key is None or key < best_key:
                best_key = key
                order = perm

    legs = []
    here = from_node
    for t in order + (mission.end,):
        legs.append(max_success_path(g, here, t))
        here = t
    prob, dist = _compose(legs)
    return MissionPlan(order + (mission.end,), tuple(legs), prob, dist)


def _greedy_order(g, mission, from_node):
    # nearest = smallest shortest-path distance from the current node
    warnings.warn(f"{len(mission.tasks)} tasks exceed the exhaustive-search "
                  "limit of 8; falling back to nearest-task greedy ordering")
    remaining = set(mission.tasks)
    here = from_node
    order = []
    while remaining:
        ranked = sorted(
            (shortest_distance_path(g, here, t).total_distance, t)
            for t in remaining)
        _, pick = ranked[0]
        order.append(pick)
        remaining.remove(pick)
        here = pick
    return tuple(order)
