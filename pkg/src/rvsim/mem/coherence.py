"""MESI coherence: snooping L1 caches, shared bus, controller and L2.

One bus transaction runs at a time. The controller grants requests round
robin, broadcasts them for one cycle, collects every cache's snoop response
on dedicated latched lines the following cycle, folds any surrendered dirty
data into the L2, and finally delivers a line (FILL), an upgrade permission
(NO_REQ, as the protocol narrative prescribes) or a flush completion
(FLUSH_DONE). L2 evictions of lines that may live above run a nested
FLUSH_REQ broadcast before the eviction completes, preserving inclusion.

Coherence scope is the containing last-level-cache line: heterogeneous L1
line widths are handled by invalidating every overlapping sub-line, and all
fills are served from the L2 after write-back merging.

Within one cycle each component runs once; all cross-component signals are
latched except the documented wires (memory responses into the memory
interface, and the interface's result into the L2), which fixes the relative
tick order memory -> memiface -> L2 while everything else may permute.
"""

from __future__ import annotations

from ..golden import SimError
from ..ports import Latch
from ..stats import BusStats, CacheStats
from .cache import (CacheArray, EXCLUSIVE, INVALID, MODIFIED, SHARED,
                    CacheParams)

# 4-bit bus message codes. The kinds and their roles follow the protocol;
# the specific bit patterns are this implementation's choice.
NO_REQ = 0
READ = 1
READ_FOR_OWNERSHIP = 2
WRITE_INTENT = 3
WRITE_BACK = 4
FLUSH = 5
FLUSH_REQ = 6
FLUSH_DONE = 7
INVALIDATE_ACK = 8
FILL = 9

KIND_NAMES = {
    NO_REQ: "NO_REQ", READ: "READ", READ_FOR_OWNERSHIP: "RFO",
    WRITE_INTENT: "WRITE_INTENT", WRITE_BACK: "WRITE_BACK", FLUSH: "FLUSH",
    FLUSH_REQ: "FLUSH_REQ", FLUSH_DONE: "FLUSH_DONE",
    INVALIDATE_ACK: "INVALIDATE_ACK", FILL: "FILL",
}


class ProtocolViolation(SimError):
    pass


class BusMessage:
    __slots__ = ("kind", "addr", "span", "cbase", "cspan", "data", "src",
                 "dst", "excl")

    def __init__(self, kind, addr=0, span=0, cbase=0, cspan=0, data=None,
                 src=-1, dst=-1, excl=False):
        self.kind = kind
        self.addr = addr      # requester line base
        self.span = span      # requester line bytes
        self.cbase = cbase    # coherence scope base (LLC line)
        self.cspan = cspan    # coherence scope bytes
        self.data = data
        self.src = src
        self.dst = dst
        self.excl = excl

    def __repr__(self):
        return (f"BusMessage({KIND_NAMES.get(self.kind, self.kind)}, "
                f"addr=0x{self.addr:08x}, src={self.src}, dst={self.dst})")


class SnoopAck:
    __slots__ = ("src", "had_copy", "writebacks")

    def __init__(self, src, had_copy, writebacks):
        self.src = src
        self.had_copy = had_copy          # held a copy of the requested line
        self.writebacks = writebacks      # list of (base, span, data words)


def mesi_snoop(state, kind):
    """Reference next-state for one line observing a remote bus message.

    Returns (action, next_state); action in {"none", "writeback"}.
    """
    if state == INVALID:
        return "none", INVALID
    if kind == READ:
        if state == MODIFIED:
            return "writeback", SHARED
        if state == EXCLUSIVE:
            return "none", SHARED
        return "none", SHARED
    if kind in (READ_FOR_OWNERSHIP, WRITE_INTENT):
        if state == MODIFIED:
            return "writeback", INVALID
        return "none", INVALID
    if kind in (FLUSH, FLUSH_REQ):
        if state == MODIFIED:
            return "writeback", INVALID
        return "none", INVALID
    raise ProtocolViolation(f"line in {state} observed unexpected {KIND_NAMES[kind]}")


def mesi_local_write(state):
    """(bus activity, next state) for a write hit on a valid line."""
    if state == MODIFIED:
        return "none", MODIFIED
    if state == EXCLUSIVE:
        return "none", MODIFIED       # silent upgrade
    if state == SHARED:
        return "broadcast", MODIFIED  # needs WRITE_INTENT + NO_REQ
    raise ProtocolViolation("write hit on an invalid line")


class L1Cache:
    """Snooping first-level cache serving one processor MemPort."""

    def __init__(self, index, params: CacheParams, port, llc_line_bytes,
                 name=None):
        self.index = index
        self.params = params
        self.array = CacheArray(params)
        self.port = port
        self.llc_line_bytes = llc_line_bytes
        self.name = name or f"l1_{index}"
        self.stats = CacheStats(self.name)
        self.req_line = Latch()   # to controller
        self.ack_line = Latch()   # to controller
        self.bus = None           # shared bus latch, set by wiring
        # Pending transaction: dict(kind, base, op, granted)
        self.pending = None
        self.wb_buffer = None     # (base, data) dirty victim awaiting drain
        self._counted = None      # request identity already counted

    def scope_of(self, addr):
        base = addr & ~(self.llc_line_bytes - 1)
        return base, self.llc_line_bytes

    # ---- per-cycle ---------------------------------------------------------

    def tick(self):
        msg = self.bus.cur
        if msg is not None and msg.kind != NO_REQ:
            self._snoop(msg)
        else:
            self._observe_no_req()
        self._serve_port()
        self._assert_request()

    def _assert_request(self):
        if self.wb_buffer is not None:
            base, data = self.wb_buffer
            self.req_line.set(("wb", base, data))
        elif self.pending is not None and not self.pending["granted"]:
            p = self.pending
            self.req_line.set((p["kind"], p["base"], None))

    # ---- snooper -----------------------------------------------------------

    def _snoop(self, msg):
        kind = msg.kind
        if kind == FILL:
            if msg.dst == self.index:
                self._install_fill(msg)
            return
        if kind == WRITE_BACK:
            if msg.src == self.index and self.wb_buffer is not None:
                self.wb_buffer = None  # our drain went on the bus
            return
        if kind == FLUSH_DONE:
            if msg.dst == self.index and self.pending \
                    and self.pending["kind"] == "flush":
                self._complete_flush()
            return
        if kind not in (READ, READ_FOR_OWNERSHIP, WRITE_INTENT, FLUSH, FLUSH_REQ):
            return
        if msg.src == self.index and kind != FLUSH and kind != FLUSH_REQ:
            if self.pending is not None and not self.pending["granted"]:
                self.pending["granted"] = True
            return
        if msg.src == self.index and kind == FLUSH and self.pending:
            self.pending["granted"] = True
            # fall through: a flush applies to our own copy as well

        had_copy = False
        writebacks = []
        for base, line in self.array.lines_in_range(msg.cbase, msg.cspan):
            overlap_req = base < msg.addr + msg.span and msg.addr < base + self.params.line_bytes
            if overlap_req and kind in (READ, READ_FOR_OWNERSHIP):
                had_copy = True
            action, nxt = mesi_snoop(line.state, kind)
            if action == "writeback":
                writebacks.append((base, self.params.line_bytes, list(line.data)))
                self.stats.snoop_writebacks += 1
            if nxt != line.state:
                if nxt == INVALID:
                    self.stats.snoop_invalidations += 1
                line.state = nxt
                line.dirty = line.dirty and nxt == MODIFIED
        # The write-back buffer snoops too: surrender buffered dirty data.
        if self.wb_buffer is not None:
            base, data = self.wb_buffer
            if base < msg.cbase + msg.cspan and msg.cbase < base + self.params.line_bytes:
                writebacks.append((base, self.params.line_bytes, list(data)))
                self.stats.snoop_writebacks += 1
                self.wb_buffer = None
                overlap_req = base < msg.addr + msg.span and msg.addr < base + self.params.line_bytes
                if overlap_req and kind in (READ, READ_FOR_OWNERSHIP):
                    had_copy = True
        # A pending upgrade whose line vanished must be retried as an RFO.
        if self.pending is not None and self.pending["kind"] == "upgrade" \
                and not self.pending["granted"]:
            if self.array.lookup(self.pending["base"]) is None:
                self.pending["kind"] = "rfo"
        self.ack_line.set(SnoopAck(self.index, had_copy, writebacks))

    # ---- fills and completions ---------------------------------------------

    def _install_fill(self, msg):
        p = self.pending
        if p is None or msg.addr != p["base"]:
            raise ProtocolViolation(f"{self.name}: unexpected fill {msg!r}")
        req = p["op"]
        if p["kind"] == "read":
            state = EXCLUSIVE if msg.excl else SHARED
            dirty = False
            self.stats.read_fills += 1
        else:
            state = MODIFIED
            dirty = True
            self.stats.rfo_fills += 1
        _, evicted, old = self.array.install(msg.addr, msg.data, state, dirty)
        if evicted is not None and old is not None and old[1]:
            assert self.wb_buffer is None, "victim buffer occupied"
            self.wb_buffer = [evicted, old[2]]
            self.stats.evictions += 1
            self.stats.writebacks += 1
        elif evicted is not None:
            self.stats.evictions += 1
        self._respond(req)
        self.pending = None

    def _complete_flush(self):
        self._respond(self.pending["op"])
        self.pending = None
        self.stats.flushes += 1

    def _respond(self, req):
        hit = self.array.lookup(req.addr)
        if req.op == "read":
            if hit is None:
                raise ProtocolViolation(f"{self.name}: fill lost for {req!r}")
            way, line = hit
            _, _, off = self._decompose(req.addr)
            self.array.touch(req.addr, way)
            self.port.respond(req.tag, req.addr, line.data[off])
        elif req.op == "write":
            if hit is None:
                raise ProtocolViolation(f"{self.name}: fill lost for {req!r}")
            way, line = hit
            _, _, off = self._decompose(req.addr)
            line.data[off] = (line.data[off] & ~req.wmask) | (req.wdata & req.wmask)
            line.state = MODIFIED
            line.dirty = True
            self.array.touch(req.addr, way)
            self.port.respond(req.tag, req.addr)
        else:  # flush / invalidate
            self.port.respond(req.tag, req.addr)
        self.port.pop()

    def _decompose(self, addr):
        from .cache import decompose_address
        return decompose_address(addr & ~3, self.params)

    # ---- processor side ----------------------------------------------------

    def _serve_port(self):
        if self.pending is not None:
            return
        req = self.port.peek()
        if req is None:
            return
        ident = (req.tag, req.addr, req.op)
        if req.op in ("flush", "invalidate"):
            base, span = self.scope_of(req.addr)
            self.pending = {"kind": "flush", "base": base, "op": req,
                            "granted": False}
            if self._counted != ident:
                self.stats.accesses += 1
                self._counted = ident
            return
        line_base = self.params.line_base(req.addr)
        hit = self.array.lookup(req.addr)
        if self._counted != ident:
            self.stats.accesses += 1
            self.stats.hits += 1 if hit is not None else 0
            self.stats.misses += 0 if hit is not None else 1
            self._counted = ident
        if hit is not None:
            way, line = hit
            if req.op == "read":
                _, _, off = self._decompose(req.addr)
                self.array.touch(req.addr, way)
                self.port.respond(req.tag, req.addr, line.data[off])
                self.port.pop()
                return
            activity, nxt = mesi_local_write(line.state)
            if activity == "none":
                _, _, off = self._decompose(req.addr)
                line.data[off] = (line.data[off] & ~req.wmask) | (req.wdata & req.wmask)
                line.state = nxt
                line.dirty = True
                self.array.touch(req.addr, way)
                self.port.respond(req.tag, req.addr)
                self.port.pop()
                return
            self.pending = {"kind": "upgrade", "base": line_base, "op": req,
                            "granted": False}
            self.stats.upgrades += 1
            return
        # Miss: a dirty victim must drain before a new line request goes out.
        kind = "read" if req.op == "read" else "rfo"
        self.pending = {"kind": kind, "base": line_base, "op": req,
                        "granted": False}

    def _observe_no_req(self):
        """Upgrade permission arrives as NO_REQ after our broadcast."""
        p = self.pending
        if p is not None and p["kind"] == "upgrade" and p["granted"]:
            req = p["op"]
            hit = self.array.lookup(p["base"])
            if hit is None:
                raise ProtocolViolation(f"{self.name}: upgraded line vanished")
            self._respond(req)
            self.pending = None

    # ---- debug / invariant helpers ------------------------------------------

    def drain(self, l2):
        """Debug flush of every line into the L2 (not cycle-timed)."""
        for base, line in list(self.array.iter_valid()):
            if line.dirty:
                l2.absorb(base, self.params.line_bytes, line.data)
            line.state = INVALID
            line.dirty = False
        if self.wb_buffer is not None:
            base, data = self.wb_buffer
            l2.absorb(base, self.params.line_bytes, data)
            self.wb_buffer = None


class LxCache:
    """Shared cache below the L1s; also usable standalone with N ports.

    In coherent mode the controller drives it through task/result latches.
    In standalone mode it serves word requests from its MemPorts with strict
    round-robin arbitration.
    """

    def __init__(self, params: CacheParams, memiface, ports=(), latency=1,
                 name="l2"):
        self.params = params
        self.array = CacheArray(params)
        self.memiface = memiface
        self.ports = list(ports)
        self.latency = max(1, latency)
        self.name = name
        self.stats = CacheStats(name)
        self.task = Latch()
        self.result = Latch()
        self.bus = None
        self._fsm = None          # active coherent task state
        self._standalone = None   # active standalone transaction
        self.grant_log = []
        self._rr = 0

    # ---- shared helpers -----------------------------------------------------

    def absorb(self, base, span, data):
        """Merge surrendered dirty words into the containing line."""
        hit = self.array.lookup(base)
        if hit is None:
            raise ProtocolViolation(
                f"{self.name}: write-back for uncached line 0x{base:08x}")
        way, line = hit
        lbase = self.params.line_base(base)
        off = (base - lbase) >> 2
        for i, word in enumerate(data):
            line.data[off + i] = word
        line.dirty = True
        self.array.touch(base, way)

    def slice_window(self, addr, span):
        hit = self.array.lookup(addr)
        if hit is None:
            return None
        _, line = hit
        lbase = self.params.line_base(addr)
        off = (addr - lbase) >> 2
        return line.data[off:off + (span >> 2)]

    # ---- per-cycle ----------------------------------------------------------

    def tick(self):
        msg = self.bus.cur if self.bus is not None else None
        if msg is not None and msg.kind == WRITE_BACK:
            self.absorb(msg.addr, msg.span, msg.data)
            self.stats.writebacks += 1
        if self._fsm is not None:
            self._advance_task()
        elif self.task.cur is not None:
            self._begin_task(self.task.cur)
            self._advance_task()
        elif self.ports:
            self._tick_standalone()

    # ---- coherent task processing -------------------------------------------

    def _begin_task(self, task):
        kind = task[0]
        if kind == "serve":
            _, op, addr, span, wbs = task
            for base, wspan, data in wbs:
                self.absorb(base, wspan, data)
            self._fsm = {"t": "serve", "op": op, "addr": addr, "span": span,
                         "wait": self.latency - 1, "phase": "lookup"}
        elif kind == "flush":
            _, cbase, cspan, wbs = task
            for base, wspan, data in wbs:
                self.absorb(base, wspan, data)
            self._fsm = {"t": "flush", "base": cbase, "wait": self.latency - 1,
                         "phase": "lookup"}
        elif kind == "backinval_done":
            raise ProtocolViolation("backinval_done with no eviction in progress")
        else:
            raise ProtocolViolation(f"unknown L2 task {task!r}")
        self.stats.accesses += 1

    def _advance_task(self):
        f = self._fsm
        # Nested back-invalidation handshake.
        if f.get("phase") == "await_backinval":
            t = self.task.cur
            if t is not None and t[0] == "backinval_done":
                for base, wspan, data in t[1]:
                    self.absorb(base, wspan, data)
                f["phase"] = "evict_wb"
            else:
                return
        if f.get("wait", 0) > 0:
            f["wait"] -= 1
            return
        if f["t"] == "serve":
            self._advance_serve(f)
        else:
            self._advance_flush(f)

    def _advance_serve(self, f):
        addr, span = f["addr"], f["span"]
        phase = f["phase"]
        if phase == "lookup":
            window = self.slice_window(addr, span)
            if window is not None:
                self.stats.hits += 1
                hit = self.array.lookup(addr)
                self.array.touch(addr, hit[0])
                self.result.set(("line", window))
                self._fsm = None
                return
            self.stats.misses += 1
            base = self.params.line_base(addr)
            tag, index, _ = self._decompose(base)
            way = self.array.select_victim(index)
            victim = self.array.lines[index][way]
            if victim.valid:
                from .cache import compose_address
                vbase = compose_address(victim.tag, index, 0, self.params)
                f.update(phase="await_backinval", victim=(index, way, vbase))
                self.result.set(("backinval", vbase, self.params.line_bytes))
                return
            f["phase"] = "fill"
            self._advance_serve(f)
            return
        if phase == "evict_wb":
            index, way, vbase = f["victim"]
            victim = self.array.lines[index][way]
            if victim.dirty:
                if not self.memiface.busy and f.get("started_wb") is None:
                    self.memiface.start_writeback(vbase, victim.data)
                    f["started_wb"] = True
                    return
                if self.memiface.take_result() is None:
                    return
            victim.state = INVALID
            victim.dirty = False
            self.stats.evictions += 1
            f["phase"] = "fill"
            f.pop("started_wb", None)
            return
        if phase == "fill":
            base = self.params.line_base(addr)
            if f.get("started_fill") is None:
                if self.memiface.busy:
                    return
                self.memiface.start_fill(base, self.params.line_words)
                f["started_fill"] = True
                return
            data = self.memiface.take_result()
            if data is None:
                return
            self.array.install(base, data, SHARED, dirty=False)
            window = self.slice_window(addr, span)
            self.result.set(("line", window))
            self._fsm = None

    def _advance_flush(self, f):
        base = f["base"]
        hit = self.array.lookup(base)
        if hit is None:
            self.result.set(("flushed",))
            self._fsm = None
            return
        _, line = hit
        if line.dirty:
            if f.get("started_wb") is None:
                if self.memiface.busy:
                    return
                self.memiface.start_writeback(self.params.line_base(base), line.data)
                f["started_wb"] = True
                return
            if self.memiface.take_result() is None:
                return
        line.state = INVALID
        line.dirty = False
        self.stats.flushes += 1
        self.result.set(("flushed",))
        self._fsm = None

    def _decompose(self, addr):
        from .cache import decompose_address
        return decompose_address(addr & ~3, self.params)

    # ---- standalone multi-port service ---------------------------------------

    def _tick_standalone(self):
        if self._standalone is not None:
            self._advance_standalone()
            return
        n = len(self.ports)
        for k in range(n):
            i = (self._rr + k) % n
            req = self.ports[i].peek()
            if req is None:
                continue
            self._rr = i + 1
            self.grant_log.append(i)
            self.stats.accesses += 1
            self._standalone = {"port": i, "req": req, "wait": self.latency - 1,
                                "phase": "lookup"}
            self._advance_standalone()
            return

    def _advance_standalone(self):
        s = self._standalone
        if s["wait"] > 0:
            s["wait"] -= 1
            return
        port = self.ports[s["port"]]
        req = s["req"]
        if s["phase"] == "lookup":
            hit = self.array.lookup(req.addr)
            if req.op in ("flush", "invalidate"):
                if hit is not None and hit[1].dirty:
                    self.memiface.start_writeback(
                        self.params.line_base(req.addr), hit[1].data)
                    self.stats.writebacks += 1
                    s["phase"] = "await_flush_wb"
                    return
                if hit is not None:
                    hit[1].state = INVALID
                self.stats.flushes += 1
                port.respond(req.tag, req.addr)
                port.pop()
                self._standalone = None
                return
            if hit is None and req.op in ("read", "write"):
                self.stats.misses += 1
                base = self.params.line_base(req.addr)
                tag, index, _ = self._decompose(base)
                way = self.array.select_victim(index)
                victim = self.array.lines[index][way]
                if victim.valid and victim.dirty:
                    from .cache import compose_address
                    vbase = compose_address(victim.tag, index, 0, self.params)
                    self.memiface.start_writeback(vbase, victim.data)
                    victim.state = INVALID
                    victim.dirty = False
                    self.stats.evictions += 1
                    self.stats.writebacks += 1
                    s["phase"] = "await_wb"
                    return
                if victim.valid:
                    victim.state = INVALID
                    self.stats.evictions += 1
                s["phase"] = "fill"
                self._advance_standalone()
                return
            if hit is not None:
                self.stats.hits += 1
            self._finish_standalone(hit)
            return
        if s["phase"] == "await_wb":
            if self.memiface.take_result() is None:
                return
            s["phase"] = "fill"
            return
        if s["phase"] == "await_flush_wb":
            if self.memiface.take_result() is None:
                return
            hit = self.array.lookup(req.addr)
            if hit is not None:
                hit[1].state = INVALID
                hit[1].dirty = False
            self.stats.flushes += 1
            port.respond(req.tag, req.addr)
            port.pop()
            self._standalone = None
            return
        if s["phase"] == "fill":
            base = self.params.line_base(s["req"].addr)
            if s.get("started") is None:
                if self.memiface.busy:
                    return
                self.memiface.start_fill(base, self.params.line_words)
                s["started"] = True
                return
            data = self.memiface.take_result()
            if data is None:
                return
            self.array.install(base, data, SHARED, dirty=False)
            self._finish_standalone(self.array.lookup(s["req"].addr))

    def _finish_standalone(self, hit):
        s = self._standalone
        port, req = self.ports[s["port"]], s["req"]
        way, line = hit
        _, _, off = self._decompose(req.addr)
        if req.op == "read":
            self.array.touch(req.addr, way)
            port.respond(req.tag, req.addr, line.data[off])
        else:
            line.data[off] = (line.data[off] & ~req.wmask) | (req.wdata & req.wmask)
            line.dirty = True
            self.array.touch(req.addr, way)
            port.respond(req.tag, req.addr)
        port.pop()
        self._standalone = None

    # ---- debug ---------------------------------------------------------------

    def drain_to_memory(self, storage):
        """Debug flush of all dirty lines straight into a MemoryStorage."""
        for base, line in self.array.iter_valid():
            if line.dirty:
                for i, word in enumerate(line.data):
                    storage.write_word((base >> 2) + i, word)
                line.dirty = False


class CoherenceController:
    """Grants the shared bus, runs transactions one at a time."""

    IDLE, WAIT_ACKS, WAIT_L2, WAIT_BI_ACKS, FINISH = range(5)

    def __init__(self, l1s, l2: LxCache, bus: Latch):
        self.l1s = list(l1s)
        self.l2 = l2
        self.bus = bus
        self.stats = BusStats()
        self.state = self.IDLE
        self.cur = None
        self.rr = 0
        self.wait = 0
        l2.bus = bus
        for l1 in self.l1s:
            l1.bus = bus

    def tick(self):
        out = None
        if self.state == self.IDLE:
            out = self._grant()
        elif self.state == self.WAIT_ACKS:
            out = self._collect_acks()
        elif self.state == self.WAIT_BI_ACKS:
            out = self._collect_backinval_acks()
        elif self.state == self.WAIT_L2:
            out = self._poll_l2()
        elif self.state == self.FINISH:
            self.state = self.IDLE
            # Requesters treat NO_REQ after their broadcast as completion.
        self.bus.set(out if out is not None else BusMessage(NO_REQ))

    def _grant(self):
        n = len(self.l1s)
        for k in range(n):
            i = (self.rr + k) % n
            req = self.l1s[i].req_line.cur
            if req is None:
                continue
            self.rr = i + 1
            kind, base, data = req
            l1 = self.l1s[i]
            cbase, cspan = l1.scope_of(base)
            span = l1.params.line_bytes
            self.stats.transactions += 1
            if kind == "wb":
                self.stats.writebacks += 1
                self.state = self.FINISH
                return BusMessage(WRITE_BACK, addr=base, span=span,
                                  cbase=cbase, cspan=cspan, data=data, src=i)
            self.cur = {"src": i, "kind": kind, "addr": base, "span": span,
                        "cbase": cbase, "cspan": cspan, "wbs": [],
                        "had_copy": False}
            self.state = self.WAIT_ACKS
            self.wait = 1
            code = {"read": READ, "rfo": READ_FOR_OWNERSHIP,
                    "upgrade": WRITE_INTENT, "flush": FLUSH}[kind]
            if kind == "read":
                self.stats.reads += 1
            elif kind == "rfo":
                self.stats.rfos += 1
            elif kind == "upgrade":
                self.stats.upgrades += 1
            else:
                self.stats.flushes += 1
            return BusMessage(code, addr=base, span=span, cbase=cbase,
                              cspan=cspan, src=i)
        return None

    def _collect_acks(self):
        if self.wait > 0:
            self.wait -= 1
            return None
        cur = self.cur
        for l1 in self.l1s:
            ack = l1.ack_line.cur
            if ack is None:
                continue
            cur["wbs"].extend(ack.writebacks)
            cur["had_copy"] = cur["had_copy"] or ack.had_copy
        kind = cur["kind"]
        if kind == "upgrade":
            # Sharers invalidated on sight; NO_REQ signals permission.
            self.state = self.FINISH
            return None
        if kind == "flush":
            self.l2.task.set(("flush", cur["cbase"], cur["cspan"], cur["wbs"]))
            self.state = self.WAIT_L2
            return None
        self.l2.task.set(("serve", kind, cur["addr"], cur["span"], cur["wbs"]))
        self.state = self.WAIT_L2
        return None

    def _collect_backinval_acks(self):
        if self.wait > 0:
            self.wait -= 1
            return None
        wbs = []
        for l1 in self.l1s:
            ack = l1.ack_line.cur
            if ack is not None:
                wbs.extend(ack.writebacks)
        self.stats.back_invalidations += 1
        self.l2.task.set(("backinval_done", wbs))
        self.state = self.WAIT_L2
        return None

    def _poll_l2(self):
        res = self.l2.result.cur
        if res is None:
            return None
        if res[0] == "backinval":
            _, vbase, vspan = res
            self.state = self.WAIT_BI_ACKS
            self.wait = 1
            return BusMessage(FLUSH_REQ, addr=vbase, span=vspan,
                              cbase=vbase, cspan=vspan, src=-1)
        if res[0] == "line":
            cur = self.cur
            excl = cur["kind"] == "read" and not cur["had_copy"]
            self.state = self.FINISH
            return BusMessage(FILL, addr=cur["addr"], span=cur["span"],
                              cbase=cur["cbase"], cspan=cur["cspan"],
                              data=res[1], dst=cur["src"], excl=excl)
        if res[0] == "flushed":
            cur = self.cur
            self.state = self.FINISH
            return BusMessage(FLUSH_DONE, addr=cur["addr"], dst=cur["src"])
        raise ProtocolViolation(f"unexpected L2 result {res!r}")
