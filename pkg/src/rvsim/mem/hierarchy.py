"""Assembled coherent cache hierarchy: L1s, bus, controller, L2, memory.

Tick order inside one cycle is memory, memory interface, L2, controller,
L1s; all other orderings are equivalent because the remaining channels are
latched. The checker functions implement the coherence invariants used by
the randomized stress tests.
"""

from __future__ import annotations

from ..ports import Latch, MemPort
from .cache import EXCLUSIVE, MODIFIED, CacheParams
from .coherence import CoherenceController, L1Cache, LxCache, ProtocolViolation
from .memiface import MemoryInterface
from .memory import MemoryComponent, MemoryStorage


class CoherentHierarchy:
    def __init__(self, l1_params_list, l2_params: CacheParams,
                 storage: MemoryStorage, mem_latency=1, l2_latency=1,
                 names=None, remote=None):
        for p in l1_params_list:
            if l2_params.line_words % p.line_words:
                raise ValueError("L2 line width must be a multiple of every "
                                 "L1 line width")
            if p.line_words > l2_params.line_words:
                raise ValueError("L1 lines cannot exceed the L2 line")
        self.storage = storage
        self.cpu_ports = []
        self.l1s = []
        self.bus = Latch()
        self.mem_port = MemPort("mem")
        self.memory = MemoryComponent(storage, [self.mem_port], mem_latency,
                                      storage.name) if storage else None
        self.memiface = MemoryInterface(self.mem_port if storage else None,
                                        remote=remote)
        llc_bytes = l2_params.line_bytes
        for i, params in enumerate(l1_params_list):
            name = names[i] if names else f"l1_{i}"
            port = MemPort(name)
            l1 = L1Cache(i, params, port, llc_bytes, name)
            self.cpu_ports.append(port)
            self.l1s.append(l1)
        self.l2 = LxCache(l2_params, self.memiface, latency=l2_latency)
        self.controller = CoherenceController(self.l1s, self.l2, self.bus)

    def tick(self):
        if self.memory is not None:
            self.memory.tick()
        self.memiface.tick()
        self.l2.tick()
        self.controller.tick()
        for l1 in self.l1s:
            l1.tick()

    def latch(self):
        self.bus.latch()
        self.l2.task.latch()
        self.l2.result.latch()
        self.mem_port.latch()
        for l1 in self.l1s:
            l1.req_line.latch()
            l1.ack_line.latch()
            l1.port.latch()

    def drain(self, write_word=None):
        """Debug flush: push every dirty line down to main memory.

        write_word(waddr, value) overrides the destination, which distributed
        configurations use to route lines to their owning node slice.
        """
        for l1 in self.l1s:
            l1.drain(self.l2)
        if write_word is None:
            self.l2.drain_to_memory(self.storage)
        else:
            for base, line in self.l2.array.iter_valid():
                if line.dirty:
                    for i, word in enumerate(line.data):
                        write_word((base >> 2) + i, word)
                    line.dirty = False

    def stats_dicts(self):
        out = [l1.stats.to_dict() for l1 in self.l1s]
        out.append(self.l2.stats.to_dict())
        return out


def check_swmr(l1s):
    """Single-writer/multiple-reader over every cached word."""
    owners = {}
    for l1 in l1s:
        for base, line in l1.array.iter_valid():
            for w in range(l1.params.line_words):
                addr = base + 4 * w
                owners.setdefault(addr, []).append((l1.name, line.state))
    for addr, holders in owners.items():
        strong = [h for h in holders if h[1] in (MODIFIED, EXCLUSIVE)]
        if strong and len(holders) > 1:
            raise ProtocolViolation(
                f"SWMR violated at 0x{addr:08x}: {holders}")
    return True


def check_inclusion(l1s, l2):
    """Every valid L1 line must live inside a valid L2 line."""
    for l1 in l1s:
        for base, _line in l1.array.iter_valid():
            if l2.array.lookup(base) is None:
                raise ProtocolViolation(
                    f"inclusion violated: {l1.name} line 0x{base:08x} "
                    f"absent from {l2.name}")
    return True


def check_dirty_implies_modified(l1s):
    for l1 in l1s:
        for base, line in l1.array.iter_valid():
            if line.dirty and line.state != MODIFIED:
                raise ProtocolViolation(
                    f"{l1.name}: dirty non-M line at 0x{base:08x}")
    return True
