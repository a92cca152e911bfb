"""Five and seven stage in-order pipelines.

Stage slots hold at most one instruction each and are processed oldest-first
every cycle, which models a write-first register file and keeps forwarding
explicit:

  five stage:  fetch -> FD -> decode -> DE -> execute -> EM -> memory -> MW
  seven stage: fetch split into issue/receive halves (requests in flight in
               the fetch unit) and memory split into M1 (issue) / M2
               (receive), so one-cycle memories and cache hits never stall.

Branches and jumps resolve in execute with no prediction: a taken transfer
squashes younger stages and restarts fetch the next cycle, costing exactly
two bubbles on the five stage pipe and three on the seven stage pipe.

Operands are frozen when an instruction leaves decode. The bypass variants
forward ALU results from any downstream slot and load results once the load
has left its receive stage; the stall variant waits for producers to reach
the register file.
"""

from __future__ import annotations

from ..golden import u32
from .base import CoreBase, PipeRec, execute_rec

FIVE_STALL = "five-stage-stall"
FIVE_BYPASS = "five-stage-bypass"
SEVEN_BYPASS = "seven-stage"


class InOrderCore(CoreBase):
    def __init__(self, hart_id, variant, imem, dmem, name=None):
        super().__init__(hart_id, imem, dmem, name)
        if variant not in (FIVE_STALL, FIVE_BYPASS, SEVEN_BYPASS):
            raise ValueError(f"unknown in-order variant {variant}")
        self.variant = variant
        self.seven = variant == SEVEN_BYPASS
        self.forwarding = variant != FIVE_STALL
        self.branch_penalty = 3 if self.seven else 2
        self.fetch_depth = 2 if self.seven else 1
        # Slots youngest-to-oldest: fd, de, em, (m1m2,) mw.
        self.fd = None
        self.de = None
        self.em = None
        self.m1m2 = None   # seven stage only
        self.mw = None
        self.redirect = None
        self._mem_wait = False
        self._hazard = None
        self._fetch_wait = False

    def tick(self):
        if self.halted:
            return
        self.cycle += 1
        self.stats.cycles += 1
        self._mem_wait = False
        self._hazard = None
        self._fetch_wait = False

        self._writeback_step()
        if self.halted:
            return
        if self.seven:
            self._mem2_step()
            self._mem1_step()
        else:
            self._mem_step()
        self._execute_step()
        self._decode_step()
        self._fetch_step()
        self._account()

    def _account(self):
        # One attribution per cycle; backpressure makes the flags mutually
        # exclusive (a blocked memory stage keeps decode from even looking).
        st = self.stats
        if self._mem_wait:
            st.stall_memory_wait += 1
        elif self._hazard == "raw":
            st.stall_raw_hazard += 1
        elif self._hazard == "load_use":
            st.stall_load_use += 1
        elif self._fetch_wait:
            if self.seven:
                st.stall_memory_wait += 1
            else:
                st.nops_inserted += 1

    # ---- stages ----------------------------------------------------------

    def _writeback_step(self):
        rec = self.mw
        if rec is None:
            return
        if rec.dec.writes_rd and rec.value is not None:
            self.regs[rec.dec.rd] = rec.value
        self.retire(rec)
        self.mw = None

    def _mem_step(self):
        rec = self.em
        if rec is None or self.mw is not None:
            return
        if rec.mem_addr is None:
            self.mw = rec
            self.em = None
            return
        if not rec.issued:
            if self.data.start(rec):
                self.mw = rec
                self.em = None
                return
            self._mem_wait = True
            return
        if self.data.finish(rec):
            self.mw = rec
            self.em = None
        else:
            self._mem_wait = True

    def _mem1_step(self):
        rec = self.em
        if rec is None or self.m1m2 is not None:
            return
        if rec.mem_addr is not None and not rec.issued:
            if self.data.start(rec):
                rec.mem_done = True
            elif not rec.issued:
                self._mem_wait = True  # data port busy
                return
        self.m1m2 = rec
        self.em = None

    def _mem2_step(self):
        rec = self.m1m2
        if rec is None or self.mw is not None:
            return
        if rec.mem_addr is not None and rec.issued and not rec.mem_done:
            if self.data.finish(rec):
                rec.mem_done = True
            else:
                self._mem_wait = True
                return
        self.mw = rec
        self.m1m2 = None

    def _execute_step(self):
        rec = self.de
        if rec is None or self.em is not None:
            return
        execute_rec(rec)
        if rec.taken:
            self.redirect = rec.next_pc
            self.fd = None
            self.fetch.squash()
            # Fixed pipeline geometry: the refetched stream reaches execute
            # exactly branch_penalty cycles late.
            self.stats.stall_branch += self.branch_penalty
        self.em = rec
        self.de = None

    def _scan_producer(self, reg):
        """Youngest in-flight producer of reg among downstream slots."""
        if self.seven:
            slots = (self.em, self.m1m2, self.mw)
        else:
            slots = (self.em, self.mw)
        for rec in slots:
            if rec is not None and rec.dec.writes_rd and rec.dec.rd == reg:
                return rec
        return None

    def _decode_step(self):
        rec = self.fd
        if rec is None or self.de is not None:
            return
        if rec.dec is None:
            rec.dec = self.decode_word(rec.raw, rec.pc)
        dec = rec.dec
        values = {}
        for reg in dec.srcs:
            prod = self._scan_producer(reg)
            if prod is None:
                continue
            if not self.forwarding:
                self._hazard = "raw"
                return
            if prod.value is None:
                self._hazard = "load_use"
                return
            values[reg] = prod.value
        regs = self.regs
        rec.a = values.get(dec.rs1, regs[dec.rs1]) if dec.rs1 else 0
        rec.b = values.get(dec.rs2, regs[dec.rs2]) if dec.rs2 else 0
        self.de = rec
        self.fd = None

    def _fetch_step(self):
        if self.redirect is not None:
            # Redirect costs this fetch slot; the new stream starts next cycle.
            self.pc = u32(self.redirect)
            self.redirect = None
            return
        if self.fetch.direct:
            if self.fd is None:
                word = self.fetch.collect(self.pc)
                self.fd = PipeRec(self.pc, word)
                self.stats.fetches += 1
                self.pc = u32(self.pc + 4)
            return
        if self.fd is None:
            word = self.fetch.collect(self.pc)
            if word is not None:
                self.fd = PipeRec(self.pc, word)
                self.pc = u32(self.pc + 4)
        # Keep the request stream full: the seven-stage issues ahead every
        # cycle; the five-stage holds one fetch at a time and only when its
        # output latch is free.
        if self.fetch.pending() < self.fetch_depth and \
                (self.seven or self.fd is None):
            issue_pc = u32(self.pc + 4 * self.fetch.pending())
            if self.fetch.issue(issue_pc, self.cycle):
                self.stats.fetches += 1
        if self.fd is None:
            if self.seven:
                # Only a late response is a memory wait; the restart gap
                # after a redirect is already in the branch penalty.
                self._fetch_wait = self.fetch.head_overdue(self.cycle)
            else:
                self._fetch_wait = self.fetch.pending() > 0
