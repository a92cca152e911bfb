"""Topology construction and routing.

Meshes get fixed dimension-order logic (X resolved before Y); rings and
custom graphs use per-router tables generated by breadth-first search.
Port convention: 0 = local, then one port per neighbor in listed order
(mesh: N, E, S, W).
"""

from __future__ import annotations

from collections import deque

LOCAL, NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3, 4
MESH_DIRS = {NORTH: (0, 1), EAST: (1, 0), SOUTH: (0, -1), WEST: (-1, 0)}


class InvalidTopology(Exception):
    pass


def route_compute(cur_xy, dest_xy):
    """Dimension-order (XY) routing on a mesh: X fully first, then Y."""
    cx, cy = cur_xy
    dx, dy = dest_xy
    if dx > cx:
        return EAST
    if dx < cx:
        return WEST
    if dy > cy:
        return NORTH
    if dy < cy:
        return SOUTH
    return LOCAL


def mesh_nodes(width, height):
    return {y * width + x: (x, y) for y in range(height) for x in range(width)}


def mesh_adjacency(width, height):
    """node -> {port: neighbor} for a 2D mesh."""
    nodes = mesh_nodes(width, height)
    adj = {}
    for node, (x, y) in nodes.items():
        ports = {}
        for port, (ox, oy) in MESH_DIRS.items():
            nx, ny = x + ox, y + oy
            if 0 <= nx < width and 0 <= ny < height:
                ports[port] = ny * width + nx
        adj[node] = ports
    return adj


def ring_adjacency(n):
    """node -> {port: neighbor}: port 1 clockwise, port 2 counter-clockwise."""
    return {i: {1: (i + 1) % n, 2: (i - 1) % n} for i in range(n)}


def bfs_next_hop(adj, src):
    """dest -> first-hop port from src, by breadth-first search.

    Neighbor ports are explored in ascending port order, so ties resolve
    toward the lowest-numbered port (clockwise on rings).
    """
    first_port = {src: LOCAL}
    frontier = deque([src])
    parent_port = {src: None}
    while frontier:
        node = frontier.popleft()
        for port in sorted(adj[node]):
            nxt = adj[node][port]
            if nxt in parent_port:
                continue
            parent_port[nxt] = None
            first_port[nxt] = port if node == src else first_port[node]
            frontier.append(nxt)
    return first_port


def validate_tables(adj, tables, n_nodes):
    """Every destination mapped, every route terminates (no cycles)."""
    for src in range(n_nodes):
        table = tables[src]
        for dest in range(n_nodes):
            if dest == src:
                continue
            if dest not in table:
                raise InvalidTopology(f"router {src} has no route to {dest}")
            node = src
            for _hop in range(n_nodes + 1):
                if node == dest:
                    break
                port = tables[node][dest]
                if port not in adj[node]:
                    raise InvalidTopology(
                        f"router {node} routes dest {dest} out of port {port} "
                        "which has no link")
                node = adj[node][port]
            else:
                raise InvalidTopology(
                    f"routing loop from {src} toward {dest}")


class Topology:
    """Connectivity + routing description handed to the network builder."""

    def __init__(self, kind, n_nodes, adjacency, coords=None, tables=None):
        self.kind = kind
        self.n_nodes = n_nodes
        self.adjacency = adjacency
        self.coords = coords
        self.tables = tables

    def ports_needed(self, node):
        return 1 + max(self.adjacency[node], default=0)


def build_topology(kind, width=0, height=0, nodes=0, adjacency=None,
                   tables=None, routing="dor"):
    """Construct a mesh, ring or custom topology description."""
    if kind == "mesh":
        if width < 1 or height < 1:
            raise InvalidTopology("mesh needs width and height >= 1")
        n = width * height
        return Topology("mesh", n, mesh_adjacency(width, height),
                        coords=mesh_nodes(width, height))
    if routing == "dor":
        raise InvalidTopology("dimension-order routing requires a mesh")
    if kind == "ring":
        if nodes < 2:
            raise InvalidTopology("ring needs at least 2 nodes")
        adj = ring_adjacency(nodes)
        gen = tables or {i: bfs_next_hop(adj, i) for i in range(nodes)}
        validate_tables(adj, gen, nodes)
        return Topology("ring", nodes, adj, tables=gen)
    if kind == "custom":
        if not adjacency:
            raise InvalidTopology("custom topology needs an adjacency map")
        n = len(adjacency)
        reach = bfs_next_hop(adjacency, 0)
        if len(reach) != n:
            raise InvalidTopology("custom topology is disconnected")
        gen = tables or {i: bfs_next_hop(adjacency, i) for i in range(n)}
        validate_tables(adjacency, gen, n)
        return Topology("custom", n, adjacency, tables=gen)
    raise InvalidTopology(f"unknown topology kind {kind!r}")
