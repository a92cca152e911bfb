"""Single cycle core: one instruction per clock against asynchronous memory.

With synchronous or off-chip memory every access costs wait cycles, reported
through nops_inserted; with asynchronous memory CPI is exactly 1.
"""

from __future__ import annotations

from ..golden import u32
from .base import CoreBase, PipeRec, execute_rec

NEED_FETCH, WAIT_FETCH, WAIT_DATA = 0, 1, 2


class SingleCycleCore(CoreBase):
    variant = "single-cycle"

    def __init__(self, hart_id, imem, dmem, name=None):
        super().__init__(hart_id, imem, dmem, name)
        self.state = NEED_FETCH
        self.rec = None

    def tick(self):
        if self.halted:
            return
        self.cycle += 1
        self.stats.cycles += 1
        retired = self._step()
        if not retired:
            self.stats.nops_inserted += 1

    def _step(self):
        if self.state == NEED_FETCH:
            if self.fetch.direct:
                word = self.fetch.collect(self.pc)
                self.stats.fetches += 1
                return self._execute(word)
            if self.fetch.issue(self.pc):
                self.stats.fetches += 1
                self.state = WAIT_FETCH
            return False
        if self.state == WAIT_FETCH:
            word = self.fetch.collect(self.pc)
            if word is None:
                return False
            return self._execute(word)
        # WAIT_DATA
        if not self.data.finish(self.rec):
            return False
        return self._writeback()

    def _execute(self, word):
        rec = PipeRec(self.pc, word, self.decode_word(word, self.pc))
        regs = self.regs
        rec.a = regs[rec.dec.rs1]
        rec.b = regs[rec.dec.rs2]
        execute_rec(rec)
        self.rec = rec
        if rec.mem_addr is not None:
            if self.data.start(rec):
                return self._writeback()
            self.state = WAIT_DATA
            return False
        return self._writeback()

    def _writeback(self):
        rec = self.rec
        if rec.dec.writes_rd and rec.value is not None:
            self.regs[rec.dec.rd] = rec.value
        self.pc = u32(rec.next_pc)
        self.retire(rec)
        self.rec = None
        self.state = NEED_FETCH
        return True
