"""Virtual-channel router with credit-based flow control.

Every input port carries `vcs` independent FIFO lanes of `depth` flits. Each
cycle every output port arbitrates round robin over eligible input lanes; a
head flit additionally claims a free downstream lane with credit, held until
its tail passes (wormhole). The single-cycle variant forwards an arriving
flit the same cycle it is buffered; the pipelined variant makes each flit
eligible stages-1 cycles after arrival but still accepts one flit per lane
per cycle, so only latency grows, not occupancy of the link.

Injection arrives over an ordinary Link on the local input port (the network
interface obeys the same credit rules as a neighbor router); ejection drains
into an unbounded latched queue read by the interface.
"""

from __future__ import annotations

from collections import deque

from ..ports import Latch, LatchedQueue
from .topology import LOCAL, route_compute


class RouterParams:
    def __init__(self, vcs=2, depth=4, variant="single-cycle", stages=4,
                 routing="dor", buffered=True):
        if vcs < 1 or depth < 1:
            raise ValueError("vcs and depth must be >= 1")
        if variant not in ("single-cycle", "pipelined"):
            raise ValueError(f"unknown router variant {variant!r}")
        self.vcs = vcs
        # Buffer-less routers degenerate to single-slot lanes that hold
        # flits until downstream credit exists; nothing is ever dropped.
        self.depth = depth if buffered else 1
        self.variant = variant
        self.stages = stages if variant == "pipelined" else 1
        self.routing = routing
        self.buffered = buffered


class Link:
    """One direction of a link: a flit lane plus a credit-return lane."""

    def __init__(self, name=""):
        self.name = name
        self.flit = Latch()
        self.credits = Latch()  # list of vc indices freed this cycle

    def latch(self):
        self.flit.latch()
        self.credits.latch()


class _InputLane:
    __slots__ = ("fifo", "out_port", "out_vc")

    def __init__(self):
        self.fifo = deque()      # (flit, eligible_at)
        self.out_port = None     # claimed for the packet currently in flight
        self.out_vc = None


class Router:
    def __init__(self, node_id, params: RouterParams, n_ports, coords=None,
                 coords_of=None, table=None, name=None):
        self.node_id = node_id
        self.params = params
        self.n_ports = n_ports
        self.coords = coords
        self.coords_of = coords_of
        self.table = table
        self.name = name or f"r{node_id}"
        self.in_links = [None] * n_ports
        self.out_links = [None] * n_ports
        self.lanes = [[_InputLane() for _ in range(params.vcs)]
                      for _ in range(n_ports)]
        self.credits = [[params.depth] * params.vcs for _ in range(n_ports)]
        self.vc_owner = [[None] * params.vcs for _ in range(n_ports)]
        self._rr_out = [0] * n_ports
        self._rr_vc = [0] * n_ports
        self.eject = LatchedQueue()
        self.eject_owner = None  # packets leave contiguously head to tail
        self.cycle = 0
        self.flits_forwarded = 0
        self.occupancy_peak = 0
        self.event_log = None

    def tick(self):
        self.cycle += 1
        self._accept_arrivals()
        self._accept_credits()
        self._arbitrate()
        occ = self.buffered_flits()
        if occ > self.occupancy_peak:
            self.occupancy_peak = occ

    def _accept_arrivals(self):
        eligible = self.cycle + self.params.stages - 1
        for port, link in enumerate(self.in_links):
            if link is None:
                continue
            flit = link.flit.cur
            if flit is None:
                continue
            lane = self.lanes[port][flit.vc]
            assert len(lane.fifo) < self.params.depth, \
                f"{self.name}: buffer overflow on port {port} vc {flit.vc}"
            if flit.timestamp is None:
                flit.timestamp = self.cycle
            lane.fifo.append((flit, eligible))
            self.occupancy_peak = max(self.occupancy_peak, self.buffered_flits())

    def _accept_credits(self):
        for port, link in enumerate(self.out_links):
            if link is None:
                continue
            freed = link.credits.cur
            if freed:
                for vc in freed:
                    self.credits[port][vc] += 1
                    assert self.credits[port][vc] <= self.params.depth

    def _route_of(self, flit):
        if flit.dest == self.node_id:
            return LOCAL
        if self.params.routing == "table":
            return self.table[flit.dest]
        return route_compute(self.coords, self.coords_of[flit.dest])

    def _arbitrate(self):
        params = self.params
        candidates = {}
        for in_port in range(self.n_ports):
            for vc in range(params.vcs):
                lane = self.lanes[in_port][vc]
                if not lane.fifo or self.cycle < lane.fifo[0][1]:
                    continue
                flit = lane.fifo[0][0]
                if flit.is_head and lane.out_port is None:
                    lane.out_port = self._route_of(flit)
                candidates.setdefault(lane.out_port, []).append((in_port, vc))
        freed = {}
        for out_port in sorted(candidates):
            winner = self._pick(out_port, candidates[out_port])
            if winner is None:
                continue
            in_port, vc = winner
            lane = self.lanes[in_port][vc]
            flit = lane.fifo.popleft()[0]
            local_eject = out_port == LOCAL and self.out_links[LOCAL] is None
            if local_eject:
                self.eject.push(flit)
            else:
                flit.vc = lane.out_vc
                self.out_links[out_port].flit.set(flit)
                self.credits[out_port][lane.out_vc] -= 1
                assert self.credits[out_port][lane.out_vc] >= 0
            self.flits_forwarded += 1
            if self.event_log is not None:
                self.event_log.append((self.cycle, self.name, flit.packet_id,
                                       flit.kind, out_port))
            if flit.is_tail:
                if local_eject:
                    self.eject_owner = None
                elif lane.out_vc is not None:
                    self.vc_owner[out_port][lane.out_vc] = None
                lane.out_port = None
                lane.out_vc = None
            freed.setdefault(in_port, []).append(vc)
        for in_port, vcs in freed.items():
            link = self.in_links[in_port]
            if link is not None:
                link.credits.set(list(vcs))

    def _pick(self, out_port, cands):
        params = self.params
        n = self.n_ports * params.vcs
        start = self._rr_out[out_port]
        ordered = sorted(cands,
                         key=lambda c: ((c[0] * params.vcs + c[1]) - start) % n)
        local_eject = out_port == LOCAL and self.out_links[LOCAL] is None
        for in_port, vc in ordered:
            lane = self.lanes[in_port][vc]
            flit = lane.fifo[0][0]
            if local_eject:
                if self.eject_owner is None and flit.is_head:
                    self.eject_owner = (in_port, vc)
                if self.eject_owner != (in_port, vc):
                    continue
                self._rr_out[out_port] = (in_port * params.vcs + vc + 1) % n
                return in_port, vc
            if flit.is_head and lane.out_vc is None:
                ovc = self._alloc_vc(out_port)
                if ovc is None:
                    continue
                lane.out_vc = ovc
                self.vc_owner[out_port][ovc] = (in_port, vc)
            if lane.out_vc is None or self.credits[out_port][lane.out_vc] <= 0:
                continue
            self._rr_out[out_port] = (in_port * params.vcs + vc + 1) % n
            return in_port, vc
        return None

    def _alloc_vc(self, out_port):
        params = self.params
        start = self._rr_vc[out_port]
        for k in range(params.vcs):
            vc = (start + k) % params.vcs
            if self.vc_owner[out_port][vc] is None and self.credits[out_port][vc] > 0:
                self._rr_vc[out_port] = (vc + 1) % params.vcs
                return vc
        return None

    def buffered_flits(self):
        return sum(len(l.fifo) for lanes in self.lanes for l in lanes)
