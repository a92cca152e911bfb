"""Shared stage machinery for all timing cores.

The same fetch/execute/memory helpers back every core variant, mirroring how
the RTL cores wrap one set of base modules. Architectural semantics come from
the functional executor's primitives so a timing bug cannot silently change
program results; the retirement-trace comparison against the golden model is
what validates the pipeline behavior itself.
"""

from __future__ import annotations

from ..golden import (HART_ID_ADDR, RetirementRecord, SimError,
                      UnsupportedInstruction, branch_taken, check_alignment,
                      execute_alu, load_extract, store_fields)
from ..isa import IllegalInstruction, decode_cached, u32
from ..ports import DirectMem, MemPort, Request
from ..stats import CoreStats


class PipeRec:
    """One instruction's journey through a pipeline."""

    __slots__ = ("pc", "raw", "dec", "a", "b", "value", "next_pc", "taken",
                 "mem_addr", "mem_wdata", "mem_wmask", "issued", "mem_done",
                 "mem_tag")

    def __init__(self, pc, raw, dec=None):
        self.pc = pc
        self.raw = raw
        self.dec = dec
        self.a = 0
        self.b = 0
        self.value = None
        self.next_pc = 0
        self.taken = False
        self.mem_addr = None
        self.mem_wdata = 0
        self.mem_wmask = 0
        self.issued = False
        self.mem_done = False
        self.mem_tag = 0


def execute_rec(rec: PipeRec, pc_plus_4=None):
    """Execute stage: ALU result, branch resolution, or load/store setup."""
    dec = rec.dec
    m = dec.mnemonic
    pc = rec.pc
    rec.next_pc = u32(pc + 4)
    if m == "ebreak":
        return
    if m == "unsupported":
        raise UnsupportedInstruction(f"reserved encoding 0x{rec.raw:08x}", pc)
    if dec.is_branch:
        rec.taken = branch_taken(m, rec.a, rec.b)
        if rec.taken:
            rec.next_pc = u32(pc + dec.imm)
        return
    if m == "jal":
        rec.taken = True
        rec.next_pc = u32(pc + dec.imm)
        rec.value = u32(pc + 4)
        return
    if m == "jalr":
        rec.taken = True
        rec.next_pc = u32(rec.a + dec.imm) & ~1
        rec.value = u32(pc + 4)
        return
    if dec.is_load:
        addr = u32(rec.a + dec.imm)
        check_alignment(m, addr, pc)
        rec.mem_addr = addr
        return
    if dec.is_store:
        addr = u32(rec.a + dec.imm)
        check_alignment(m, addr, pc)
        waddr, wdata, wmask = store_fields(m, addr, rec.b)
        rec.mem_addr = waddr
        rec.mem_wdata = wdata
        rec.mem_wmask = wmask
        return
    rec.value = execute_alu(m, rec.a, rec.b, dec.imm, pc)


def retirement_of(rec: PipeRec) -> RetirementRecord:
    dec = rec.dec
    out = RetirementRecord(rec.pc, rec.raw)
    if dec.writes_rd and rec.value is not None:
        out.rd, out.value = dec.rd, rec.value
    if dec.is_store:
        out.mem_addr, out.mem_value, out.mem_mask = (rec.mem_addr, rec.mem_wdata,
                                                     rec.mem_wmask)
    return out


def is_idle_jump(rec: PipeRec) -> bool:
    """Halt convention: an effect-free jump back to its own address."""
    if rec.dec.mnemonic == "ebreak":
        return True
    return (rec.taken and rec.next_pc == rec.pc
            and not rec.dec.writes_rd and not rec.dec.is_store)


class FetchUnit:
    """Instruction fetch over either a direct memory or a MemPort.

    Port mode keeps up to `depth` requests in flight. A redirect cannot
    retract requests the memory side already latched, so squashed fetches
    live on as zombies: their responses are drained and discarded, only then
    does port capacity return to the new stream.
    """

    def __init__(self, imem, depth=2):
        self.direct = isinstance(imem, DirectMem)
        self.imem = imem
        self.depth = depth
        self.seq = 0
        self.inflight = []  # [tag, pc, stale, issue_cycle] oldest first

    def issue(self, pc, cycle=0):
        """Try to start fetching pc; returns True when accepted."""
        if self.direct:
            return True
        if self.pending() >= self.depth or not self.imem.can_post():
            return False
        self.seq += 1
        self.imem.post(Request("read", pc, tag=self.seq))
        self.inflight.append([self.seq, pc, False, cycle])
        return True

    def head_overdue(self, cycle):
        """A live fetch response is late: true memory wait, not refill slack."""
        for _tag, _pc, stale, issued in self.inflight:
            if stale:
                continue
            return cycle > issued
        return False

    def collect(self, pc):
        """Raw word for pc if available this cycle, else None.

        Also drains responses belonging to squashed requests.
        """
        if self.direct:
            return self.imem.read(pc)
        while self.inflight and self.inflight[0][2]:
            tag = self.inflight[0][0]
            if self.imem.take(tag) is None:
                return None  # zombie still outstanding, keep waiting
            self.inflight.pop(0)
        if not self.inflight:
            return None
        tag, req_pc = self.inflight[0][0], self.inflight[0][1]
        if req_pc != pc:
            return None
        resp = self.imem.take(tag)
        if resp is None:
            return None
        self.inflight.pop(0)
        return resp.data

    def squash(self):
        if self.direct:
            return
        retracted = set(self.imem.retract_incoming())
        self.inflight = [f for f in self.inflight if f[0] not in retracted]
        for f in self.inflight:
            f[2] = True

    def pending(self):
        """Live (non-stale) fetches in flight."""
        return sum(1 for f in self.inflight if not f[2])


class DataUnit:
    """Data access over either a direct memory or a MemPort.

    Counts loads/stores in the core stats as real data-memory accesses;
    hart-id register reads never touch memory and are excluded.
    """

    def __init__(self, dmem, hart_id, stats):
        self.direct = isinstance(dmem, DirectMem)
        self.dmem = dmem
        self.hart_id = hart_id
        self.stats = stats
        self.seq = 0

    def _count(self, dec):
        if dec.is_load:
            self.stats.loads += 1
        else:
            self.stats.stores += 1

    def start(self, rec: PipeRec) -> bool:
        """Issue the access for rec; True if it completed immediately."""
        dec = rec.dec
        if dec.is_load and (rec.mem_addr & ~3) == (HART_ID_ADDR & ~3):
            rec.value = load_extract(dec.mnemonic, rec.mem_addr, self.hart_id)
            return True
        if self.direct:
            if dec.is_load:
                word = self.dmem.read(rec.mem_addr & ~3)
                rec.value = load_extract(dec.mnemonic, rec.mem_addr, word)
            else:
                self.dmem.write(rec.mem_addr, rec.mem_wdata, rec.mem_wmask)
            self._count(dec)
            return True
        if not self.dmem.can_post():
            return False
        self.seq += 1
        rec.mem_tag = self.seq
        if dec.is_load:
            self.dmem.post(Request("read", rec.mem_addr & ~3, tag=rec.mem_tag))
        else:
            self.dmem.post(Request("write", rec.mem_addr, rec.mem_wdata,
                                   rec.mem_wmask, tag=rec.mem_tag))
        self._count(dec)
        rec.issued = True
        return False

    def finish(self, rec: PipeRec) -> bool:
        """Poll for completion of the issued access."""
        resp = self.dmem.take(rec.mem_tag)
        if resp is None:
            return False
        if rec.dec.is_load:
            rec.value = load_extract(rec.dec.mnemonic, rec.mem_addr, resp.data)
        return True


class CoreBase:
    """Common construction and retirement plumbing."""

    def __init__(self, hart_id, imem, dmem, name=None):
        self.hart_id = hart_id
        self.name = name or f"core{hart_id}"
        self.stats = CoreStats(self.name)
        self.halted = False
        self.on_retire = None
        self.pc = 0
        self.regs = [0] * 32
        self.fetch = FetchUnit(imem)
        self.data = DataUnit(dmem, hart_id, self.stats)
        self.cycle = 0

    def decode_word(self, word, pc):
        try:
            return decode_cached(word)
        except IllegalInstruction as e:
            raise SimError(f"{e} (cycle {self.cycle})", pc) from e

    def retire(self, rec: PipeRec):
        out = retirement_of(rec)
        self.stats.retired += 1
        if rec.taken and (rec.dec.is_branch or rec.dec.is_jump):
            self.stats.taken_branches += 1
        if self.on_retire is not None:
            self.on_retire(out)
        if is_idle_jump(rec):
            self.halted = True
        return out
