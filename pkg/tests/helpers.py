"""Shared test oracles: random DAGs, a path-enumeration d-separation
checker, and brute-force structure enumeration. Everything here is kept
independent of the library's own algorithms so tests cross-validate."""

from __future__ import annotations

import random
from itertools import combinations

import numpy as np

from ancestral.core import Weight, WeightedInput, canonicalize, is_ancestral_structure, Polarity
from ancestral.simulate import d_separated


def random_dag(n_nodes: int, edge_prob: float, rng: random.Random) -> np.ndarray:
    """Random DAG adjacency: random order, forward coin-flip edges."""
    order = list(range(n_nodes))
    rng.shuffle(order)
    adj = np.zeros((n_nodes, n_nodes), dtype=bool)
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                adj[order[i], order[j]] = True
    return adj


def path_d_separated(adj: np.ndarray, x: int, y: int, cond: set[int]) -> bool:
    """Textbook d-separation by exhaustive simple-path enumeration:
    every undirected path must contain a blocking node."""
    n = adj.shape[0]
    reach_cache = {}

    def has_descendant_in(v: int, targets: set[int]) -> bool:
        if v in reach_cache:
            return reach_cache[v]
        seen = set()
        stack = [v]
        found = False
        while stack:
            u = stack.pop()
            if u in targets:
                found = True
                break
            for w in range(n):
                if adj[u, w] and w not in seen:
                    seen.add(w)
                    stack.append(w)
        reach_cache[v] = found
        return found

    def blocked(path: list[int]) -> bool:
        for i in range(1, len(path) - 1):
            a, v, b = path[i - 1], path[i], path[i + 1]
            collider = adj[a, v] and adj[b, v]
            if collider:
                if v not in cond and not has_descendant_in(v, cond):
                    return True
            else:
                if v in cond:
                    return True
        return False

    def walk(path: list[int]) -> bool:
        # returns True when some unblocked path reaches y
        v = path[-1]
        if v == y:
            return not blocked(path)
        for w in range(n):
            if (adj[v, w] or adj[w, v]) and w not in path:
                if walk(path + [w]):
                    return True
        return False

    return not walk([x])


def all_structure_matrices(n: int) -> list[list[list[bool]]]:
    """Every valid structure matrix by filtering all off-diagonal bit
    combinations; usable up to n = 4."""
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]
    out = []
    for bits in range(1 << len(pairs)):
        matrix = [[x == y for y in range(n)] for x in range(n)]
        for i, (x, y) in enumerate(pairs):
            if (bits >> i) & 1:
                matrix[x][y] = True
        if is_ancestral_structure(matrix):
            out.append(matrix)
    return out


def dag_oracle_inputs(adj: np.ndarray, n_obs: int, max_order: int) -> list[WeightedInput]:
    """Hard (in)dependence statements over observed variables 0..n_obs-1
    read off a full DAG's d-separations."""
    out = []
    others = lambda x, y: [v for v in range(n_obs) if v != x and v != y]
    for x in range(n_obs):
        for y in range(x + 1, n_obs):
            conds = [()]
            for k in range(1, max_order + 1):
                conds.extend(combinations(others(x, y), k))
            for cond in conds:
                polarity = (
                    Polarity.INDEPENDENT
                    if d_separated(adj, x, y, set(cond))
                    else Polarity.DEPENDENT
                )
                bits = 0
                for u in cond:
                    bits |= 1 << u
                out.append(WeightedInput(canonicalize(x, y, bits, polarity), Weight.hard()))
    return out
