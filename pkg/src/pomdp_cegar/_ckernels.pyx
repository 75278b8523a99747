# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

from collections import deque
from math import gcd


def propagate(rows, vec):
    cdef Py_ssize_t n = len(vec)
    cdef Py_ssize_t i
    cdef list out = [0] * n
    cdef object x, w
    cdef Py_ssize_t j
    for i in range(n):
        x = vec[i]
        if x:
            for j, w in rows[i]:
                out[j] = out[j] + x * w
    return out


def children(rows, vec, zgroups):
    cdef list out = propagate(rows, vec)
    cdef Py_ssize_t n = len(out)
    cdef list result = []
    cdef list child
    cdef Py_ssize_t z, j
    cdef object g, v
    z = 0
    for group in zgroups:
        g = 0
        for j in group:
            v = out[j]
            if v:
                g = gcd(g, v)
        if g:
            child = [0] * n
            for j in group:
                child[j] = out[j] // g
            result.append((z, g, tuple(child)))
        z += 1
    return result


def masked_sum(vec, indices):
    cdef object total = 0
    cdef Py_ssize_t j
    for j in indices:
        total = total + vec[j]
    return total


def max_flow(Py_ssize_t n, edges, Py_ssize_t source, Py_ssize_t sink):
    cdef list cap = [dict() for _ in range(n)]
    cdef list flow = [dict() for _ in range(n)]
    cdef list parent
    cdef Py_ssize_t u, v
    cdef object c, r, bottleneck
    cdef object value = 0
    cdef dict cu
    for u, v, c in edges:
        cu = cap[u]
        cu[v] = cu.get(v, 0) + c
        (<dict>cap[v]).setdefault(u, 0)
    while True:
        parent = [-1] * n
        parent[source] = source
        queue = deque([source])
        while queue and parent[sink] < 0:
            u = queue.popleft()
            for v, c in (<dict>cap[u]).items():
                if parent[v] < 0 and c - (<dict>flow[u]).get(v, 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if parent[sink] < 0:
            break
        bottleneck = None
        v = sink
        while v != source:
            u = parent[v]
            r = (<dict>cap[u])[v] - (<dict>flow[u]).get(v, 0)
            if bottleneck is None or r < bottleneck:
                bottleneck = r
            v = u
        v = sink
        while v != source:
            u = parent[v]
            (<dict>flow[u])[v] = (<dict>flow[u]).get(v, 0) + bottleneck
            (<dict>flow[v])[u] = (<dict>flow[v]).get(u, 0) - bottleneck
            v = u
        value = value + bottleneck
    per_edge = []
    for u, v, c in edges:
        per_edge.append(max(0, min(c, (<dict>flow[u]).get(v, 0))))
    return value, per_edge
