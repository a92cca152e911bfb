"""Main memory models: asynchronous, synchronous and off-chip.

MemoryStorage is the raw word array. MemoryComponent serves MemPorts with
the model's latency; asynchronous storages can instead be handed to cores
directly for zero-latency combinational access.
"""

from __future__ import annotations

from ..golden import SimError
from ..isa import MASK32

KINDS = ("asynchronous", "synchronous", "off-chip")
DEFAULT_LATENCY = {"asynchronous": 0, "synchronous": 1, "off-chip": 4}


class MemoryStorage:
    """Flat word-addressed backing store.

    base_word offsets the addressable window, which lets a distributed node
    own one contiguous slice of the global address space.
    """

    def __init__(self, words, name="mem", base_word=0):
        self.words = [0] * words
        self.size = words
        self.name = name
        self.base_word = base_word

    def load_image(self, image):
        for waddr, word in image.items():
            if not 0 <= waddr - self.base_word < self.size:
                raise SimError(f"{self.name}: image word 0x{waddr:x} out of bounds")
            self.words[waddr - self.base_word] = word & MASK32

    def read_word(self, waddr):
        waddr -= self.base_word
        if not 0 <= waddr < self.size:
            raise SimError(f"{self.name}: read of word 0x{waddr:x} out of bounds")
        return self.words[waddr]

    def write_word(self, waddr, data, mask=MASK32):
        waddr -= self.base_word
        if not 0 <= waddr < self.size:
            raise SimError(f"{self.name}: write of word 0x{waddr:x} out of bounds")
        if mask == MASK32:
            self.words[waddr] = data & MASK32
        else:
            self.words[waddr] = (self.words[waddr] & ~mask) | (data & mask)


class MemoryComponent:
    """Serves one or more MemPorts from a storage with a fixed latency.

    A request becomes visible the cycle after it is posted and the response
    is produced latency-1 cycles later, so the requester observes the full
    `latency` in cycles (one-cycle synchronous RAM responds the same cycle
    it first sees a request). Latency 0 degenerates to 1 through a port.
    """

    def __init__(self, storage: MemoryStorage, ports, latency=1, name="memory"):
        self.storage = storage
        self.ports = list(ports)
        self.extra_wait = max(0, latency - 1)
        self.name = name
        self._busy = {}  # port index -> remaining wait cycles for head request

    def add_port(self, port):
        self.ports.append(port)

    def tick(self):
        for i, port in enumerate(self.ports):
            req = port.peek()
            if req is None:
                self._busy.pop(i, None)
                continue
            wait = self._busy.get(i)
            if wait is None:
                wait = self.extra_wait
            if wait > 0:
                self._busy[i] = wait - 1
                continue
            self._busy.pop(i, None)
            port.pop()
            if req.op == "read":
                port.respond(req.tag, req.addr, self.storage.read_word(req.addr >> 2))
            elif req.op == "write":
                self.storage.write_word(req.addr >> 2, req.wdata, req.wmask)
                port.respond(req.tag, req.addr)
            else:
                # flush/invalidate are no-ops on raw memory
                port.respond(req.tag, req.addr)
