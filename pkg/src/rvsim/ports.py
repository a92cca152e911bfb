"""Valid/ready memory ports and latched inter-component channels.

All cross-component signals in the timing simulation travel through objects
defined here. Writers put values on the `next` side during their tick; the
scheduler's latch pass makes them visible the following cycle. The one
documented exception is MemPort.resp: memory-side components compute it in
the memory phase of a cycle and cores consume it in the core phase of the
same cycle, which is what gives caches and synchronous RAM their one-cycle
access time.
"""

from __future__ import annotations

from collections import deque


class Request:
    """One memory request: read/write/flush/invalidate plus address/data."""

    __slots__ = ("op", "addr", "wdata", "wmask", "tag")

    def __init__(self, op, addr, wdata=0, wmask=0, tag=0):
        self.op = op
        self.addr = addr
        self.wdata = wdata
        self.wmask = wmask
        self.tag = tag

    def __repr__(self):
        return f"Request({self.op}, addr=0x{self.addr:08x}, tag={self.tag})"


class Response:
    """Completion for a previously issued request (valid data_out)."""

    __slots__ = ("tag", "addr", "data")

    def __init__(self, tag, addr, data=0):
        self.tag = tag
        self.addr = addr
        self.data = data


class MemPort:
    """Request/response pair between one requester and one memory system.

    Up to two requests may be in flight (one being answered, one freshly
    posted), mirroring pipelined cache access. The memory side answers the
    oldest pending request; `ready` low tells the requester to hold.
    """

    MAX_PENDING = 2

    def __init__(self, name=""):
        self.name = name
        self.queue = deque()
        self._incoming = []
        self.resp_queue = deque()  # in-order responses held until taken
        self.ready = True

    # requester side
    def can_post(self):
        return self.ready and len(self.queue) + len(self._incoming) < self.MAX_PENDING

    def post(self, req: Request):
        self._incoming.append(req)

    @property
    def resp(self):
        """Oldest unconsumed response (view only)."""
        return self.resp_queue[0] if self.resp_queue else None

    def take(self, tag):
        """Consume the oldest response if it matches `tag`."""
        if self.resp_queue and self.resp_queue[0].tag == tag:
            return self.resp_queue.popleft()
        return None

    def retract_incoming(self):
        """Drop requests posted this cycle that have not latched yet.

        Latched requests are already owned by the memory side and cannot be
        retracted; their responses must be consumed and discarded instead.
        """
        dropped = [q.tag for q in self._incoming]
        self._incoming.clear()
        return dropped

    # memory side
    def peek(self):
        """Oldest pending request, or None while the response queue is full."""
        if len(self.resp_queue) >= self.MAX_PENDING or not self.queue:
            return None
        return self.queue[0]

    def pop(self):
        return self.queue.popleft()

    def respond(self, tag, addr, data=0):
        assert len(self.resp_queue) < self.MAX_PENDING, "response queue full"
        self.resp_queue.append(Response(tag, addr, data))

    # scheduler
    def latch(self):
        if self._incoming:
            self.queue.extend(self._incoming)
            self._incoming.clear()


class Latch:
    """Single-value channel: written via set(), visible next cycle as .cur."""

    __slots__ = ("cur", "_next")

    def __init__(self):
        self.cur = None
        self._next = None

    def set(self, value):
        self._next = value

    def latch(self):
        self.cur = self._next
        self._next = None


class LatchedQueue:
    """FIFO channel with a one-cycle transport delay."""

    __slots__ = ("queue", "_incoming")

    def __init__(self):
        self.queue = deque()
        self._incoming = []

    def push(self, value):
        self._incoming.append(value)

    def pop(self):
        return self.queue.popleft()

    def peek(self):
        return self.queue[0] if self.queue else None

    def __len__(self):
        return len(self.queue)

    def latch(self):
        if self._incoming:
            self.queue.extend(self._incoming)
            self._incoming.clear()


class DirectMem:
    """Zero-latency combinational view of a memory storage.

    Only single-core cacheless configurations with asynchronous memory use
    this path; everything else goes through a MemPort.
    """

    def __init__(self, storage):
        self.storage = storage

    def read(self, addr):
        return self.storage.read_word(addr >> 2)

    def write(self, addr, data, mask):
        self.storage.write_word(addr >> 2, data, mask)
