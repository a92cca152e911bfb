"""ISA-level functional executor and retirement traces.

This is the golden model: a plain interpreter over flat word memory. Every
timing core is checked against the retirement trace produced here.
"""

from __future__ import annotations

import json

from .isa import MASK32, IllegalInstruction, decode_cached, s32, u32

# Read-only memory-mapped register returning the hart index; gives kernel
# wrappers a dispatch mechanism without CSRs.
HART_ID_ADDR = 0xFFFFFFF0


class SimError(Exception):
    """Base for architectural execution errors; carries the faulting pc."""

    def __init__(self, msg, pc=None):
        self.pc = pc
        if pc is not None:
            msg = f"{msg} at pc=0x{pc:08x}"
        super().__init__(msg)


class MemoryOutOfBounds(SimError):
    pass


class MisalignedAccess(SimError):
    pass


class UnsupportedInstruction(SimError):
    pass


class StepLimitExceeded(SimError):
    pass


class RetirementRecord:
    """One retired instruction: (pc, raw, rd, value, store effect).

    rd is 0 and value is 0 when no register was written. For stores,
    mem_addr/mem_value/mem_mask describe the word-granular masked write.
    """

    __slots__ = ("pc", "raw", "rd", "value", "mem_addr", "mem_value", "mem_mask")

    def __init__(self, pc, raw, rd=0, value=0, mem_addr=None, mem_value=0, mem_mask=0):
        self.pc = pc
        self.raw = raw
        self.rd = rd
        self.value = value
        self.mem_addr = mem_addr
        self.mem_value = mem_value
        self.mem_mask = mem_mask

    def key(self):
        return (self.pc, self.raw, self.rd, self.value,
                self.mem_addr, self.mem_value, self.mem_mask)

    def __eq__(self, other):
        return isinstance(other, RetirementRecord) and self.key() == other.key()

    def __repr__(self):
        s = f"pc={self.pc:08x} instr={self.raw:08x} rd={self.rd} val={self.value:08x}"
        if self.mem_addr is not None:
            s += f" mem[{self.mem_addr:08x}]={self.mem_value:08x}/{self.mem_mask:08x}"
        return s

    def text_line(self):
        return f"pc={self.pc:08x} instr={self.raw:08x} rd={self.rd} val={self.value:08x}"

    def to_dict(self):
        d = {"pc": self.pc, "instr": self.raw, "rd": self.rd, "val": self.value}
        if self.mem_addr is not None:
            d.update(mem_addr=self.mem_addr, mem_value=self.mem_value,
                     mem_mask=self.mem_mask)
        return d


def trace_text(records):
    """Line-oriented text form of a retirement trace."""
    return "\n".join(r.text_line() for r in records) + ("\n" if records else "")


def trace_jsonl(records):
    """Machine-readable variant: one JSON object per line."""
    return "".join(json.dumps(r.to_dict()) + "\n" for r in records)


class ArchState:
    """Architectural registers, pc and a flat word-addressed memory."""

    __slots__ = ("regs", "pc", "mem", "halted", "hart_id")

    def __init__(self, mem_words=65536, hart_id=0):
        self.regs = [0] * 32
        self.pc = 0
        self.mem = [0] * mem_words
        self.halted = False
        self.hart_id = hart_id

    def load_image(self, image):
        """Copy a MemoryImage (word addr -> word) into memory."""
        for waddr, word in image.items():
            if waddr < 0 or waddr >= len(self.mem):
                raise MemoryOutOfBounds(f"image word address 0x{waddr:x} outside memory")
            self.mem[waddr] = word & MASK32

    def read_word(self, addr, pc=None):
        if addr == HART_ID_ADDR:
            return self.hart_id
        waddr = addr >> 2
        if addr < 0 or waddr >= len(self.mem):
            raise MemoryOutOfBounds(f"load address 0x{addr:08x} out of bounds", pc)
        return self.mem[waddr]

    def write_word(self, addr, value, mask=MASK32, pc=None):
        waddr = addr >> 2
        if addr < 0 or waddr >= len(self.mem) or addr == HART_ID_ADDR:
            raise MemoryOutOfBounds(f"store address 0x{addr:08x} out of bounds", pc)
        if mask == MASK32:
            self.mem[waddr] = value & MASK32
        else:
            self.mem[waddr] = (self.mem[waddr] & ~mask) | (value & mask)


def store_fields(mnemonic, addr, value):
    """Word-aligned (addr, shifted data, byte-lane mask) for a store."""
    word_addr = addr & ~3
    byte = addr & 3
    if mnemonic == "sw":
        return word_addr, value & MASK32, MASK32
    if mnemonic == "sh":
        shift = byte * 8
        return word_addr, (value & 0xFFFF) << shift, 0xFFFF << shift
    shift = byte * 8
    return word_addr, (value & 0xFF) << shift, 0xFF << shift


def load_extract(mnemonic, addr, word):
    """Pull the addressed bytes out of a memory word and extend them."""
    byte = addr & 3
    if mnemonic == "lw":
        return word
    if mnemonic in ("lh", "lhu"):
        half = (word >> (byte * 8)) & 0xFFFF
        if mnemonic == "lh" and half & 0x8000:
            half -= 0x10000
        return u32(half)
    b = (word >> (byte * 8)) & 0xFF
    if mnemonic == "lb" and b & 0x80:
        b -= 0x100
    return u32(b)


def check_alignment(mnemonic, addr, pc):
    if mnemonic in ("lw", "sw") and addr & 3:
        raise MisalignedAccess(f"{mnemonic} to 0x{addr:08x}", pc)
    if mnemonic in ("lh", "lhu", "sh") and addr & 1:
        raise MisalignedAccess(f"{mnemonic} to 0x{addr:08x}", pc)


def execute_alu(mnemonic, a, b, imm, pc):
    """Shared integer ALU semantics over unsigned 32-bit operands."""
    if mnemonic == "addi":
        return u32(a + imm)
    if mnemonic == "add":
        return u32(a + b)
    if mnemonic == "sub":
        return u32(a - b)
    if mnemonic == "andi":
        return a & u32(imm)
    if mnemonic == "ori":
        return a | u32(imm)
    if mnemonic == "xori":
        return a ^ u32(imm)
    if mnemonic == "and":
        return a & b
    if mnemonic == "or":
        return a | b
    if mnemonic == "xor":
        return a ^ b
    if mnemonic == "slti":
        return 1 if s32(a) < imm else 0
    if mnemonic == "sltiu":
        return 1 if a < u32(imm) else 0
    if mnemonic == "slt":
        return 1 if s32(a) < s32(b) else 0
    if mnemonic == "sltu":
        return 1 if a < b else 0
    if mnemonic == "slli":
        return u32(a << (imm & 0x1F))
    if mnemonic == "srli":
        return a >> (imm & 0x1F)
    if mnemonic == "srai":
        return u32(s32(a) >> (imm & 0x1F))
    if mnemonic == "sll":
        return u32(a << (b & 0x1F))
    if mnemonic == "srl":
        return a >> (b & 0x1F)
    if mnemonic == "sra":
        return u32(s32(a) >> (b & 0x1F))
    if mnemonic == "lui":
        return u32(imm)
    if mnemonic == "auipc":
        return u32(pc + imm)
    raise ValueError(f"not an ALU op: {mnemonic}")


def branch_taken(mnemonic, a, b):
    if mnemonic == "beq":
        return a == b
    if mnemonic == "bne":
        return a != b
    if mnemonic == "blt":
        return s32(a) < s32(b)
    if mnemonic == "bge":
        return s32(a) >= s32(b)
    if mnemonic == "bltu":
        return a < b
    return a >= b  # bgeu


def step(state: ArchState) -> RetirementRecord:
    """Apply exactly one instruction's architectural effect.

    Returns the retirement record. Sets state.halted on EBREAK or when an
    effect-free jump targets its own pc (the kernel wrapper's idle loop).
    """
    pc = state.pc
    if pc & 3:
        raise MisalignedAccess("misaligned pc", pc)
    if pc >> 2 >= len(state.mem):
        raise MemoryOutOfBounds("fetch out of bounds", pc)
    raw = state.mem[pc >> 2]
    try:
        dec = decode_cached(raw)
    except IllegalInstruction as e:
        raise SimError(str(e), pc) from e

    m = dec.mnemonic
    regs = state.regs
    next_pc = u32(pc + 4)
    rec = RetirementRecord(pc, raw)

    if m == "ebreak":
        state.halted = True
        state.pc = next_pc
        return rec
    if m == "unsupported":
        raise UnsupportedInstruction(f"reserved encoding 0x{raw:08x}", pc)

    if dec.is_branch:
        if branch_taken(m, regs[dec.rs1], regs[dec.rs2]):
            next_pc = u32(pc + dec.imm)
    elif m == "jal":
        next_pc = u32(pc + dec.imm)
        if dec.rd:
            regs[dec.rd] = u32(pc + 4)
            rec.rd, rec.value = dec.rd, regs[dec.rd]
    elif m == "jalr":
        next_pc = u32(regs[dec.rs1] + dec.imm) & ~1
        if dec.rd:
            regs[dec.rd] = u32(pc + 4)
            rec.rd, rec.value = dec.rd, regs[dec.rd]
    elif dec.is_load:
        addr = u32(regs[dec.rs1] + dec.imm)
        check_alignment(m, addr, pc)
        word = state.read_word(addr & ~3, pc)
        if dec.rd:
            regs[dec.rd] = load_extract(m, addr, word)
            rec.rd, rec.value = dec.rd, regs[dec.rd]
    elif dec.is_store:
        addr = u32(regs[dec.rs1] + dec.imm)
        check_alignment(m, addr, pc)
        waddr, wdata, wmask = store_fields(m, addr, regs[dec.rs2])
        state.write_word(waddr, wdata, wmask, pc)
        rec.mem_addr, rec.mem_value, rec.mem_mask = waddr, wdata, wmask
    else:
        val = execute_alu(m, regs[dec.rs1], regs[dec.rs2], dec.imm, pc)
        if dec.rd:
            regs[dec.rd] = val
            rec.rd, rec.value = dec.rd, val

    # Halt convention: an effect-free jump back to its own address is the
    # kernel wrapper's post-main idle loop.
    if next_pc == pc and rec.rd == 0 and rec.mem_addr is None:
        state.halted = True
    state.pc = next_pc
    return rec


def run_golden(image, entry=0, max_steps=20_000_000, mem_words=65536, hart_id=0,
               on_retire=None):
    """Execute a memory image until halt or max_steps; return the full trace.

    `image` is a word-address -> word mapping. Raises StepLimitExceeded when
    max_steps instructions retire without halting.
    """
    state = ArchState(mem_words=mem_words, hart_id=hart_id)
    state.load_image(image)
    state.pc = u32(entry)
    trace = []
    while not state.halted:
        if len(trace) >= max_steps:
            raise StepLimitExceeded(f"no halt within {max_steps} steps", state.pc)
        rec = step(state)
        trace.append(rec)
        if on_retire is not None:
            on_retire(rec)
    return trace, state
