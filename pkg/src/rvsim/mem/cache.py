"""Parameterized set-associative cache structures and replacement policies.

CacheArray is the raw tag/data store shared by the L1 and Lx cache
controllers; it knows nothing about coherence or ports, which keeps victim
selection and LRU behavior directly testable against reference algorithms.
"""

from __future__ import annotations

from ..isa import MASK32

MODIFIED, EXCLUSIVE, SHARED, INVALID = "M", "E", "S", "I"
VALID_STATES = (MODIFIED, EXCLUSIVE, SHARED)


class CacheConfigError(Exception):
    pass


class CacheParams:
    """Geometry and policy of one cache level.

    sets = 2^index_bits, line words = 2^offset_bits, capacity follows as
    sets * ways * 4 * 2^offset_bits bytes.
    """

    def __init__(self, index_bits=6, offset_bits=2, ways=4,
                 replacement="lru", level="L1", seed=1):
        if index_bits < 0:
            raise CacheConfigError("index_bits must be >= 0")
        if offset_bits < 0:
            raise CacheConfigError("offset_bits must be >= 0")
        if ways < 1:
            raise CacheConfigError("ways must be >= 1")
        if replacement not in ("lru", "random"):
            raise CacheConfigError(f"unknown replacement policy {replacement!r}")
        self.index_bits = index_bits
        self.offset_bits = offset_bits
        self.ways = ways
        self.replacement = replacement
        self.level = level
        self.seed = seed

    @property
    def sets(self):
        return 1 << self.index_bits

    @property
    def line_words(self):
        return 1 << self.offset_bits

    @property
    def line_bytes(self):
        return 4 * self.line_words

    @property
    def capacity_bytes(self):
        return self.sets * self.ways * self.line_bytes

    def line_base(self, addr):
        """Byte address of the start of the line containing addr."""
        return addr & ~(self.line_bytes - 1)

    def to_dict(self):
        return {"index_bits": self.index_bits, "offset_bits": self.offset_bits,
                "ways": self.ways, "replacement": self.replacement,
                "capacity_bytes": self.capacity_bytes}


def decompose_address(addr, params: CacheParams):
    """Split a byte address into (tag, index, word offset).

    Reassembling tag|index|offset|00 yields the word-aligned address back.
    """
    if addr & 3:
        raise CacheConfigError(f"misaligned address 0x{addr:08x}")
    word = addr >> 2
    offset = word & (params.line_words - 1)
    index = (word >> params.offset_bits) & (params.sets - 1)
    tag = word >> (params.offset_bits + params.index_bits)
    return tag, index, offset


def compose_address(tag, index, offset, params: CacheParams):
    return (((tag << params.index_bits | index) << params.offset_bits | offset) << 2)


class CacheLine:
    __slots__ = ("tag", "state", "dirty", "data")

    def __init__(self, line_words):
        self.tag = 0
        self.state = INVALID
        self.dirty = False
        self.data = [0] * line_words

    @property
    def valid(self):
        return self.state != INVALID


class _LruState:
    """True LRU: per-set list of way indices, most recent last."""

    def __init__(self, sets, ways):
        self.order = [list(range(ways)) for _ in range(sets)]

    def touch(self, index, way):
        order = self.order[index]
        order.remove(way)
        order.append(way)

    def victim(self, index):
        return self.order[index][0]


class _RandomState:
    """Seeded 32-bit linear congruential generator per cache."""

    A, C = 1103515245, 12345

    def __init__(self, ways, seed):
        self.ways = ways
        self.state = seed & MASK32

    def touch(self, index, way):
        pass

    def victim(self, index):
        self.state = (self.A * self.state + self.C) & MASK32
        return (self.state >> 16) % self.ways


class CacheArray:
    """Tag/state/data store for one cache level."""

    def __init__(self, params: CacheParams):
        self.params = params
        self.lines = [[CacheLine(params.line_words) for _ in range(params.ways)]
                      for _ in range(params.sets)]
        if params.replacement == "lru":
            self.policy = _LruState(params.sets, params.ways)
        else:
            self.policy = _RandomState(params.ways, params.seed)

    def lookup(self, addr):
        """(way, line) when the containing line is valid, else None."""
        tag, index, _ = decompose_address(addr & ~3, self.params)
        for way, line in enumerate(self.lines[index]):
            if line.valid and line.tag == tag:
                return way, line
        return None

    def touch(self, addr, way):
        _, index, _ = decompose_address(addr & ~3, self.params)
        self.policy.touch(index, way)

    def select_victim(self, index):
        """Way to install into: any invalid way first, else the policy pick."""
        for way, line in enumerate(self.lines[index]):
            if not line.valid:
                return way
        return self.policy.victim(index)

    def install(self, addr, data, state, dirty=False):
        """Install a line; returns (way, evicted base addr or None, old line)."""
        tag, index, _ = decompose_address(addr & ~3, self.params)
        way = self.select_victim(index)
        line = self.lines[index][way]
        evicted = None
        old = None
        if line.valid:
            evicted = compose_address(line.tag, index, 0, self.params)
            old = (line.state, line.dirty, list(line.data))
        line.tag = tag
        line.state = state
        line.dirty = dirty
        line.data = list(data)
        self.policy.touch(index, way)
        return way, evicted, old

    def invalidate(self, addr):
        hit = self.lookup(addr)
        if hit:
            hit[1].state = INVALID
            hit[1].dirty = False

    def line_base(self, addr):
        return self.params.line_base(addr)

    def iter_valid(self):
        """Yield (base addr, line) for every valid line."""
        p = self.params
        for index, ways in enumerate(self.lines):
            for line in ways:
                if line.valid:
                    yield compose_address(line.tag, index, 0, p), line

    def lines_in_range(self, base, span_bytes):
        """Valid own lines whose range intersects [base, base+span)."""
        out = []
        for addr, line in self.iter_valid():
            if addr < base + span_bytes and base < addr + self.params.line_bytes:
                out.append((addr, line))
        return out
