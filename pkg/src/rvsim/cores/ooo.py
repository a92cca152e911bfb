"""Out-of-order core: instruction queue, scheduler, ALU pool, in-order commit.

Dispatch inserts decoded instructions into an age-ordered queue and records
their destination registers in the rd table. The scheduler issues at most one
hazard-free entry per cycle, oldest first, onto a free ALU; results are never
forwarded, so an entry stays blocked while any older in-flight instruction
writes one of its sources, and operands are read from the register file at
issue time. Commit drains strictly in age order at one instruction per cycle;
memory operations perform their access at the commit head. There is no
speculation: fetch stops after a control-flow instruction enters the queue
and resumes from the resolved target when it commits.
"""

from __future__ import annotations

from ..golden import u32
from .base import CoreBase, PipeRec, execute_rec

OOO = "ooo"


class AluPool:
    """Parameterized set of pipelined ALUs; each accepts one issue per cycle."""

    def __init__(self, latencies):
        self.latencies = list(latencies) or [1]
        self.issued_at = [-1] * len(self.latencies)

    def find_free(self, cycle):
        for i, at in enumerate(self.issued_at):
            if at != cycle:
                return i
        return None

    def issue(self, i, cycle):
        self.issued_at[i] = cycle
        return max(1, self.latencies[i])


class QueueEntry:
    __slots__ = ("age", "rec", "blocking")

    def __init__(self, age, rec, blocking):
        self.age = age
        self.rec = rec
        self.blocking = blocking  # ages of older writers of my sources


class OooCore(CoreBase):
    variant = OOO

    def __init__(self, hart_id, imem, dmem, name=None,
                 queue_length=8, alu_latencies=(1,)):
        super().__init__(hart_id, imem, dmem, name)
        if queue_length < 1:
            raise ValueError("queue_length must be >= 1")
        self.queue_length = queue_length
        self.alus = AluPool(alu_latencies)
        self.fd = None
        self.fetch_hold = False
        self.queue = []            # QueueEntry, age order
        self.rd_writers = {}       # reg -> set of in-flight ages
        self.exec_jobs = []        # (done_cycle, entry)
        self.rob = {}              # age -> completed QueueEntry
        self.next_age = 0
        self.commit_age = 0
        self.head_mem_busy = False
        self._retired_now = False

    def in_flight(self):
        return self.next_age - self.commit_age

    def tick(self):
        if self.halted:
            return
        self.cycle += 1
        self.stats.cycles += 1
        self._retired_now = False

        self._commit_step()
        if self.halted:
            return
        self._complete_step()
        self._schedule_step()
        self._dispatch_step()
        self._fetch_step()
        self._account()

    def _account(self):
        if self._retired_now:
            return
        st = self.stats
        if self.head_mem_busy:
            st.stall_memory_wait += 1
        elif self.fetch_hold:
            st.stall_branch += 1
        elif self.rob.get(self.commit_age) is None and self._head_blocked():
            st.stall_raw_hazard += 1

    def _head_blocked(self):
        for e in self.queue:
            if e.age == self.commit_age:
                return bool(e.blocking)
        return False

    # ---- commit (in order, one per cycle) --------------------------------

    def _commit_step(self):
        entry = self.rob.get(self.commit_age)
        if entry is None:
            return
        rec = entry.rec
        if rec.mem_addr is not None and not rec.mem_done:
            # Memory operations wait at the commit head until done.
            if not rec.issued:
                if self.data.start(rec):
                    rec.mem_done = True
                else:
                    self.head_mem_busy = True  # posted or port busy
                    return
            elif self.data.finish(rec):
                rec.mem_done = True
            else:
                self.head_mem_busy = True
                return
        self.head_mem_busy = False
        self._writeback(entry)

    def _writeback(self, entry):
        rec = entry.rec
        dec = rec.dec
        if dec.writes_rd and rec.value is not None:
            self.regs[dec.rd] = rec.value
        if dec.writes_rd:
            ages = self.rd_writers.get(dec.rd)
            if ages:
                ages.discard(entry.age)
                if not ages:
                    del self.rd_writers[dec.rd]
            for e in self.queue:
                e.blocking.discard(entry.age)
        del self.rob[entry.age]
        self.commit_age += 1
        self.retire(rec)
        self._retired_now = True
        if dec.is_branch or dec.is_jump:
            self.pc = u32(rec.next_pc)
            self.fetch_hold = False

    # ---- execution --------------------------------------------------------

    def _complete_step(self):
        still = []
        for done_cycle, entry in self.exec_jobs:
            if self.cycle >= done_cycle:
                self.rob[entry.age] = entry
            else:
                still.append((done_cycle, entry))
        self.exec_jobs = still

    def _schedule_step(self):
        for e in self.queue:  # age order: longest waiting first
            if e.blocking:
                continue
            alu = self.alus.find_free(self.cycle)
            if alu is None:
                return
            latency = self.alus.issue(alu, self.cycle)
            rec = e.rec
            rec.a = self.regs[rec.dec.rs1]
            rec.b = self.regs[rec.dec.rs2]
            execute_rec(rec)
            self.queue.remove(e)
            self.exec_jobs.append((self.cycle + latency, e))
            return  # up to one instruction scheduled per cycle

    # ---- front end ---------------------------------------------------------

    def _dispatch_step(self):
        rec = self.fd
        if rec is None or len(self.queue) >= self.queue_length:
            return
        if rec.dec is None:
            rec.dec = self.decode_word(rec.raw, rec.pc)
        dec = rec.dec
        age = self.next_age
        blocking = set()
        for reg in dec.srcs:
            blocking |= self.rd_writers.get(reg, set())
        entry = QueueEntry(age, rec, blocking)
        self.queue.append(entry)
        if dec.writes_rd:
            self.rd_writers.setdefault(dec.rd, set()).add(age)
        self.next_age += 1
        self.fd = None
        if dec.is_branch or dec.is_jump or dec.mnemonic == "ebreak":
            # No speculation: stop fetching until this instruction commits.
            self.fetch_hold = True
            self.fd = None
            self.fetch.squash()

    def _fetch_step(self):
        if self.fetch_hold:
            return
        if self.fd is None:
            word = self.fetch.collect(self.pc)
            if word is not None:
                self.fd = PipeRec(self.pc, word)
                self.pc = u32(self.pc + 4)
        if self.fetch.pending() < 2:
            issue_pc = u32(self.pc + 4 * self.fetch.pending())
            if self.fetch.issue(issue_pc, self.cycle):
                self.stats.fetches += 1
