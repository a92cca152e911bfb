"""Main memory interface: bridges cache-line requests to word transactions.

Fills and write-backs are issued one word at a time against the backing
MemPort, so a line of W words against latency-L memory costs W*L cycles.
When a node map is attached (distributed memory over the NoC), requests for
remote addresses become network packets instead.
"""

from __future__ import annotations

from ..golden import SimError
from ..ports import Request


class AddressUnmapped(SimError):
    pass


class MemoryInterface:
    """One outstanding line fill or write-back at a time."""

    def __init__(self, port, name="memiface", remote=None):
        self.port = port          # MemPort to the local memory, may be None
        self.name = name
        self.remote = remote      # optional NodeMap for NoC-attached memory
        self.op = None            # ("fill"|"wb", base, words, data, next_word)
        self.result = None
        self.seq = 0
        self._waiting_tag = None
        self._remote_wait = False

    @property
    def busy(self):
        return self.op is not None

    def start_fill(self, base, words):
        assert self.op is None
        self.op = ["fill", base, words, [], 0]
        self.result = None
        self._post_next()

    def start_writeback(self, base, data):
        assert self.op is None
        self.op = ["wb", base, len(data), list(data), 0]
        self.result = None
        self._post_next()

    def take_result(self):
        """Fill data once complete (True for write-backs), else None."""
        r = self.result
        self.result = None
        return r

    def tick(self):
        if self.op is None:
            return
        kind, base, words, data, idx = self.op
        if self.remote is not None and not self.remote.is_local(base):
            self._tick_remote()
            return
        if self.port is None:
            raise AddressUnmapped(f"{self.name}: no local memory for 0x{base:08x}")
        if self._waiting_tag is not None:
            resp = self.port.take(self._waiting_tag)
            if resp is None:
                return
            self._waiting_tag = None
            if kind == "fill":
                data.append(resp.data)
            idx += 1
            self.op[4] = idx
            if idx >= words:
                self.result = data if kind == "fill" else True
                self.op = None
                return
        self._post_next()

    def _post_next(self):
        kind, base, words, data, idx = self.op
        if self.remote is not None and not self.remote.is_local(base):
            return
        if self.port is None or self._waiting_tag is not None \
                or not self.port.can_post():
            return
        self.seq += 1
        addr = base + 4 * idx
        if kind == "fill":
            self.port.post(Request("read", addr, tag=self.seq))
        else:
            self.port.post(Request("write", addr, data[idx], 0xFFFFFFFF,
                                   tag=self.seq))
        self._waiting_tag = self.seq

    def _tick_remote(self):
        kind, base, words, data, _ = self.op
        if not self._remote_wait:
            if kind == "fill":
                self.remote.send_fill_request(base, words)
            else:
                self.remote.send_writeback(base, data)
            self._remote_wait = True
            return
        done = self.remote.poll(base)
        if done is None:
            return
        self._remote_wait = False
        self.op = None
        self.result = done if kind == "fill" else True
