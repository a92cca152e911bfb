"""Statistics containers exported by cores, caches, the bus and the NoC."""

from __future__ import annotations


class CoreStats:
    """Per-core cycle accounting.

    Each non-retiring cycle is attributed to at most one cause, so the stall
    counters always sum to <= cycles:
      - memory_wait: data-side waits, plus fetch waits on cores with
        registered memory interfaces (cache misses on the seven-stage core);
      - raw_hazard / load_use: decode-stage hazard holds;
      - branch: refill bubbles after a taken control transfer;
      - nops_inserted: fetch/data wait bubbles on cores without registered
        memory interfaces (the single cycle and five stage cores).
    """

    FIELDS = ("cycles", "retired", "stall_raw_hazard", "stall_load_use",
              "stall_branch", "stall_memory_wait", "nops_inserted",
              "fetches", "loads", "stores", "taken_branches")

    __slots__ = FIELDS + ("name",)

    def __init__(self, name=""):
        self.name = name
        for f in self.FIELDS:
            setattr(self, f, 0)

    @property
    def memory_accesses(self):
        return self.fetches + self.loads + self.stores

    def ipc(self):
        return self.retired / self.cycles if self.cycles else 0.0

    def to_dict(self):
        d = {f: getattr(self, f) for f in self.FIELDS}
        d["name"] = self.name
        d["memory_accesses"] = self.memory_accesses
        d["ipc"] = round(self.ipc(), 6)
        return d


class CacheStats:
    FIELDS = ("accesses", "hits", "misses", "writebacks", "evictions",
              "snoop_writebacks", "snoop_invalidations", "upgrades",
              "read_fills", "rfo_fills", "flushes")

    __slots__ = FIELDS + ("name",)

    def __init__(self, name=""):
        self.name = name
        for f in self.FIELDS:
            setattr(self, f, 0)

    def miss_rate(self):
        return self.misses / self.accesses if self.accesses else 0.0

    def to_dict(self):
        d = {f: getattr(self, f) for f in self.FIELDS}
        d["name"] = self.name
        d["miss_rate"] = round(self.miss_rate(), 6)
        return d


class BusStats:
    FIELDS = ("transactions", "reads", "rfos", "upgrades", "flushes",
              "writebacks", "back_invalidations")

    __slots__ = FIELDS

    def __init__(self):
        for f in self.FIELDS:
            setattr(self, f, 0)

    def to_dict(self):
        return {f: getattr(self, f) for f in self.FIELDS}


class NocStats:
    """Flit-level counters plus a coarse packet latency histogram."""

    def __init__(self):
        self.flits_injected = 0
        self.flits_ejected = 0
        self.packets_injected = 0
        self.packets_ejected = 0
        self.flits_forwarded = {}      # router name -> count
        self.max_occupancy = {}        # router name -> peak buffered flits
        self.latency_hist = {}         # latency bucket -> packets
        self.latency_sum = 0

    def record_packet(self, latency):
        self.packets_ejected += 1
        self.latency_sum += latency
        bucket = 1 << max(0, latency - 1).bit_length()
        self.latency_hist[bucket] = self.latency_hist.get(bucket, 0) + 1

    def avg_latency(self):
        return self.latency_sum / self.packets_ejected if self.packets_ejected else 0.0

    def to_dict(self):
        return {
            "flits_injected": self.flits_injected,
            "flits_ejected": self.flits_ejected,
            "packets_injected": self.packets_injected,
            "packets_ejected": self.packets_ejected,
            "flits_forwarded": dict(self.flits_forwarded),
            "max_occupancy": dict(self.max_occupancy),
            "latency_hist": {str(k): v for k, v in sorted(self.latency_hist.items())},
            "avg_packet_latency": round(self.avg_latency(), 4),
        }
