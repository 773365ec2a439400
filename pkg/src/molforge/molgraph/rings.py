"""Ring perception: bridges and the smallest set of smallest rings.

The SSSR is computed as a minimum cycle basis: Horton's candidate set
(for every vertex ``v`` and edge ``(x, y)``, the cycle formed by the shortest
paths ``v..x`` and ``v..y`` plus the edge), sorted by length, then filtered
greedily for GF(2) independence of the edge incidence vectors.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence


def find_bridges(n_atoms: int, edges: Sequence[tuple[int, int]]) -> set[int]:
    """Indices of edges whose removal disconnects their component."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))

    disc = [-1] * n_atoms
    low = [0] * n_atoms
    bridges: set[int] = set()
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        # iterative DFS: (vertex, edge used to enter, neighbor iterator position)
        stack = [(root, -1, 0)]
        while stack:
            v, parent_edge, pos = stack[-1]
            if pos < len(adj[v]):
                stack[-1] = (v, parent_edge, pos + 1)
                w, k = adj[v][pos]
                if k == parent_edge:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, k, 0))
                else:
                    low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        bridges.add(parent_edge)
    return bridges


def count_components(n_atoms: int, edges: Sequence[tuple[int, int]]) -> int:
    parent = list(range(n_atoms))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return sum(1 for a in range(n_atoms) if find(a) == a)


def _bfs_tree(src: int, adj: list[list[tuple[int, int]]]) -> tuple[dict[int, int], dict[int, tuple[int, int]]]:
    dist = {src: 0}
    via: dict[int, tuple[int, int]] = {}  # vertex -> (parent vertex, edge index)
    q = deque([src])
    while q:
        v = q.popleft()
        for w, k in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                via[w] = (v, k)
                q.append(w)
    return dist, via


def _path_to_root(v: int, via: dict[int, tuple[int, int]]) -> tuple[list[int], list[int]]:
    verts = [v]
    edges = []
    while v in via:
        p, k = via[v]
        edges.append(k)
        verts.append(p)
        v = p
    return verts, edges


def sssr(n_atoms: int, edges: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Smallest set of smallest rings as ordered atom cycles.

    The number of rings returned equals the cyclomatic number
    ``E - V + C``. Among equal-size alternatives the choice is deterministic
    for a given atom numbering.
    """
    bridges = find_bridges(n_atoms, edges)
    ring_edges = [k for k in range(len(edges)) if k not in bridges]
    if not ring_edges:
        return []
    target = len(edges) - n_atoms + count_components(n_atoms, edges)

    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for k in ring_edges:
        u, v = edges[k]
        adj[u].append((v, k))
        adj[v].append((u, k))
    for lst in adj:
        lst.sort()

    candidates: dict[int, tuple[int, ...]] = {}
    ring_vertices = sorted({a for k in ring_edges for a in edges[k]})
    for src in ring_vertices:
        dist, via = _bfs_tree(src, adj)
        for k in ring_edges:
            x, y = edges[k]
            if x not in dist or y not in dist:
                continue
            if via.get(x, (None, None))[1] == k or via.get(y, (None, None))[1] == k:
                continue  # tree edge
            px, ex = _path_to_root(x, via)
            py, ey = _path_to_root(y, via)
            # the two tree paths must meet only at the source
            if len(set(px) & set(py)) != 1:
                continue
            mask = 1 << k
            for e in ex + ey:
                mask |= 1 << e
            if mask in candidates:
                continue
            cycle = tuple(list(reversed(px)) + py[:-1])
            candidates[mask] = cycle

    ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), sorted(kv[1]), kv[1]))
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    rings: list[tuple[int, ...]] = []
    for mask, cycle in ordered:
        vec = mask
        while vec:
            pivot = vec.bit_length() - 1
            if pivot in basis:
                vec ^= basis[pivot]
            else:
                basis[pivot] = vec
                rings.append(_normalize_cycle(cycle))
                break
        if len(rings) == target:
            break
    return rings


def _normalize_cycle(cycle: tuple[int, ...]) -> tuple[int, ...]:
    """Rotate/reflect a cycle so it starts at its smallest atom, ascending neighbor first."""
    i = cycle.index(min(cycle))
    rot = cycle[i:] + cycle[:i]
    if len(rot) > 2 and rot[-1] < rot[1]:
        rot = (rot[0],) + tuple(reversed(rot[1:]))
    return rot
