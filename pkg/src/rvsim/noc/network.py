"""Assembled network: routers, links and per-node network interfaces."""

from __future__ import annotations

from collections import deque

from ..stats import NocStats
from .flit import make_packet
from .router import Link, Router, RouterParams
from .topology import LOCAL, Topology


class NetworkInterface:
    """Per-node injection/ejection endpoint obeying link credit rules."""

    def __init__(self, node_id, router: Router, params: RouterParams, stats):
        self.node_id = node_id
        self.router = router
        self.params = params
        self.stats = stats
        self.inject_link = Link(f"ni{node_id}->r{node_id}")
        router.in_links[LOCAL] = self.inject_link
        self.credits = [params.depth] * params.vcs
        self.queue = deque()          # flits awaiting injection
        self.delivered = []           # completed packets (id, src, payloads)
        self._partial = {}            # packet_id -> payload list
        self._rr_vc = 0
        self._hold_vc = None
        self.on_packet = None
        self.cycle = 0

    def send_packet(self, packet_id, dest, payloads):
        flits = make_packet(packet_id, self.node_id, dest, payloads)
        self.queue.extend(flits)
        self.stats.packets_injected += 1
        return flits

    def tick(self):
        self.cycle += 1
        freed = self.inject_link.credits.cur
        if freed:
            for vc in freed:
                self.credits[vc] += 1
        self._eject()
        self._inject()

    def _inject(self):
        if not self.queue:
            return
        flit = self.queue[0]
        if flit.is_head:
            vc = self._pick_vc()
            if vc is None:
                return
            flit.vc = vc
            self._hold_vc = vc
        else:
            if self.credits[self._hold_vc] <= 0:
                return
            flit.vc = self._hold_vc
        self.queue.popleft()
        self.credits[flit.vc] -= 1
        self.inject_link.flit.set(flit)
        self.stats.flits_injected += 1

    def _pick_vc(self):
        for k in range(self.params.vcs):
            vc = (self._rr_vc + k) % self.params.vcs
            if self.credits[vc] > 0:
                self._rr_vc = (vc + 1) % self.params.vcs
                return vc
        return None

    def _eject(self):
        while len(self.router.eject):
            flit = self.router.eject.pop()
            self.stats.flits_ejected += 1
            parts = self._partial.setdefault(flit.packet_id, [])
            if flit.is_head and parts:
                raise AssertionError(
                    f"packet {flit.packet_id} interleaved at node {self.node_id}")
            parts.append(flit)
            if flit.is_tail:
                payloads = [f.payload for f in parts]
                del self._partial[flit.packet_id]
                latency = self.cycle - parts[0].timestamp
                self.stats.record_packet(latency)
                self.delivered.append((flit.packet_id, flit.src, payloads,
                                       latency))
                if self.on_packet is not None:
                    self.on_packet(flit.packet_id, flit.src, payloads)


class Network:
    """Routers plus NIs; ticks as one component group inside the system."""

    def __init__(self, topology: Topology, params: RouterParams,
                 event_log=False):
        self.topology = topology
        self.params = params
        self.stats = NocStats()
        self.routers = []
        self.nis = []
        self.links = []
        self.event_log = [] if event_log else None
        for node in range(topology.n_nodes):
            n_ports = topology.ports_needed(node)
            router = Router(
                node, params, n_ports,
                coords=topology.coords.get(node) if topology.coords else None,
                coords_of=topology.coords,
                table=topology.tables.get(node) if topology.tables else None)
            router.event_log = self.event_log
            self.routers.append(router)
            self.nis.append(NetworkInterface(node, router, params, self.stats))
        for node, ports in topology.adjacency.items():
            for port, neighbor in ports.items():
                link = Link(f"r{node}p{port}->r{neighbor}")
                self.routers[node].out_links[port] = link
                back = [p for p, n in topology.adjacency[neighbor].items()
                        if n == node]
                if not back:
                    from .topology import InvalidTopology
                    raise InvalidTopology(
                        f"link {node}->{neighbor} has no reverse edge")
                self.routers[neighbor].in_links[back[0]] = link
                self.links.append(link)

    def tick(self):
        for router in self.routers:
            router.tick()
        for ni in self.nis:
            ni.tick()

    def latch(self):
        for link in self.links:
            link.latch()
        for ni in self.nis:
            ni.inject_link.latch()
        for router in self.routers:
            router.eject.latch()

    def quiescent(self):
        if any(ni.queue for ni in self.nis):
            return False
        if any(r.buffered_flits() for r in self.routers):
            return False
        for link in self.links + [ni.inject_link for ni in self.nis]:
            if link.flit.cur is not None or link.flit._next is not None:
                return False
        for r in self.routers:
            if len(r.eject) or r.eject._incoming:
                return False
        return True

    def finalize_stats(self):
        for r in self.routers:
            self.stats.flits_forwarded[r.name] = r.flits_forwarded
            self.stats.max_occupancy[r.name] = r.occupancy_peak
        return self.stats
