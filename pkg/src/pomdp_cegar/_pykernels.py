"""Pure-Python reference kernels.

Vectors are tuples of Python ints (occupancies scaled by a common
denominator); ``rows[i]`` lists ``(j, weight)`` successor pairs of state ``i``
under one action. The compiled module ``_ckernels`` implements the same
functions and must agree with these bit for bit.
"""

from collections import deque
from math import gcd


def propagate(rows, vec):
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        if x:
            for j, w in rows[i]:
                out[j] += x * w
    return out


def children(rows, vec, zgroups):
    """Successor occupancy split by observation label.

    Returns ``(z, g, child)`` for every label with nonzero mass, where
    ``child`` is the primitive integer vector and ``g`` its gcd scale.
    """
    out = propagate(rows, vec)
    n = len(out)
    result = []
    for z, group in enumerate(zgroups):
        g = 0
        for j in group:
            if out[j]:
                g = gcd(g, out[j])
        if g:
            child = [0] * n
            for j in group:
                child[j] = out[j] // g
            result.append((z, g, tuple(child)))
    return result


def masked_sum(vec, indices):
    total = 0
    for j in indices:
        total += vec[j]
    return total


def max_flow(n, edges, source, sink):
    """Edmonds-Karp on integer capacities; returns (value, flow per edge)."""
    cap = [dict() for _ in range(n)]
    for u, v, c in edges:
        cap[u][v] = cap[u].get(v, 0) + c
        cap[v].setdefault(u, 0)
    flow = [dict() for _ in range(n)]
    value = 0
    while True:
        parent = [-1] * n
        parent[source] = source
        queue = deque([source])
        while queue and parent[sink] < 0:
            u = queue.popleft()
            for v, c in cap[u].items():
                if parent[v] < 0 and c - flow[u].get(v, 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if parent[sink] < 0:
            break
        bottleneck = None
        v = sink
        while v != source:
            u = parent[v]
            r = cap[u][v] - flow[u].get(v, 0)
            bottleneck = r if bottleneck is None or r < bottleneck else bottleneck
            v = u
        v = sink
        while v != source:
            u = parent[v]
            flow[u][v] = flow[u].get(v, 0) + bottleneck
            flow[v][u] = flow[v].get(u, 0) - bottleneck
            v = u
        value += bottleneck
    per_edge = []
    for u, v, c in edges:
        per_edge.append(max(0, min(c, flow[u].get(v, 0))))
    return value, per_edge
