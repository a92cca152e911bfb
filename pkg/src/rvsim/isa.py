"""RV32I instruction decoding and encoding.

The decoder is the single source of instruction semantics metadata for the
whole simulator: the functional executor, the timing cores and the assembler
all go through the tables defined here.
"""

from __future__ import annotations

MASK32 = 0xFFFFFFFF


class IllegalInstruction(Exception):
    """Raised for encodings outside RV32I."""

    def __init__(self, word, detail=""):
        self.word = word & MASK32
        msg = f"illegal instruction 0x{self.word:08x}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def sign_extend(value: int, bits: int) -> int:
    """Sign-extend the low `bits` of value to a Python int."""
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        return value - (1 << bits)
    return value


def u32(x: int) -> int:
    return x & MASK32


def s32(x: int) -> int:
    x &= MASK32
    return x - 0x100000000 if x & 0x80000000 else x


# Instruction formats.
R, I, S, B, U, J = "R", "I", "S", "B", "U", "J"

OP_LUI = 0b0110111
OP_AUIPC = 0b0010111
OP_JAL = 0b1101111
OP_JALR = 0b1100111
OP_BRANCH = 0b1100011
OP_LOAD = 0b0000011
OP_STORE = 0b0100011
OP_IMM = 0b0010011
OP_REG = 0b0110011
OP_MISC_MEM = 0b0001111
OP_SYSTEM = 0b1110011

# mnemonic -> (format, opcode, funct3, funct7); funct fields are None when
# the format does not carry them.
ENCODINGS = {
    "lui": (U, OP_LUI, None, None),
    "auipc": (U, OP_AUIPC, None, None),
    "jal": (J, OP_JAL, None, None),
    "jalr": (I, OP_JALR, 0b000, None),
    "beq": (B, OP_BRANCH, 0b000, None),
    "bne": (B, OP_BRANCH, 0b001, None),
    "blt": (B, OP_BRANCH, 0b100, None),
    "bge": (B, OP_BRANCH, 0b101, None),
    "bltu": (B, OP_BRANCH, 0b110, None),
    "bgeu": (B, OP_BRANCH, 0b111, None),
    "lb": (I, OP_LOAD, 0b000, None),
    "lh": (I, OP_LOAD, 0b001, None),
    "lw": (I, OP_LOAD, 0b010, None),
    "lbu": (I, OP_LOAD, 0b100, None),
    "lhu": (I, OP_LOAD, 0b101, None),
    "sb": (S, OP_STORE, 0b000, None),
    "sh": (S, OP_STORE, 0b001, None),
    "sw": (S, OP_STORE, 0b010, None),
    "addi": (I, OP_IMM, 0b000, None),
    "slti": (I, OP_IMM, 0b010, None),
    "sltiu": (I, OP_IMM, 0b011, None),
    "xori": (I, OP_IMM, 0b100, None),
    "ori": (I, OP_IMM, 0b110, None),
    "andi": (I, OP_IMM, 0b111, None),
    "slli": (I, OP_IMM, 0b001, 0b0000000),
    "srli": (I, OP_IMM, 0b101, 0b0000000),
    "srai": (I, OP_IMM, 0b101, 0b0100000),
    "add": (R, OP_REG, 0b000, 0b0000000),
    "sub": (R, OP_REG, 0b000, 0b0100000),
    "sll": (R, OP_REG, 0b001, 0b0000000),
    "slt": (R, OP_REG, 0b010, 0b0000000),
    "sltu": (R, OP_REG, 0b011, 0b0000000),
    "xor": (R, OP_REG, 0b100, 0b0000000),
    "srl": (R, OP_REG, 0b101, 0b0000000),
    "sra": (R, OP_REG, 0b101, 0b0100000),
    "or": (R, OP_REG, 0b110, 0b0000000),
    "and": (R, OP_REG, 0b111, 0b0000000),
    "ebreak": (I, OP_SYSTEM, 0b000, None),
}

LOADS = frozenset(["lb", "lh", "lw", "lbu", "lhu"])
STORES = frozenset(["sb", "sh", "sw"])
BRANCHES = frozenset(["beq", "bne", "blt", "bge", "bltu", "bgeu"])
JUMPS = frozenset(["jal", "jalr"])
# Register-writing mnemonics (rd meaningful); branches and stores never write.
NO_RD = BRANCHES | STORES | frozenset(["ebreak", "unsupported"])


class DecodedInstruction:
    """One RV32I instruction after field extraction.

    `imm` is the sign-extended immediate prescribed by the format (for U-type
    it is the full shifted value). `raw` keeps the original 32-bit encoding so
    encode() can reproduce it bit-exactly.
    """

    __slots__ = ("mnemonic", "rd", "rs1", "rs2", "imm", "fmt", "raw",
                 "is_load", "is_store", "is_branch", "is_jump", "writes_rd",
                 "srcs")

    def __init__(self, mnemonic, rd=0, rs1=0, rs2=0, imm=0, fmt=I, raw=0):
        self.mnemonic = mnemonic
        self.rd = rd
        self.rs1 = rs1
        self.rs2 = rs2
        self.imm = imm
        self.fmt = fmt
        self.raw = raw
        self.is_load = mnemonic in LOADS
        self.is_store = mnemonic in STORES
        self.is_branch = mnemonic in BRANCHES
        self.is_jump = mnemonic in JUMPS
        self.writes_rd = rd != 0 and mnemonic not in NO_RD
        # Architectural source registers (x0 excluded: never a hazard).
        if fmt in (R, S, B):
            self.srcs = tuple(r for r in (rs1, rs2) if r)
        elif fmt == I and mnemonic not in ("ebreak", "unsupported"):
            self.srcs = (rs1,) if rs1 else ()
        else:
            self.srcs = ()

    def __eq__(self, other):
        return (isinstance(other, DecodedInstruction)
                and self.mnemonic == other.mnemonic and self.rd == other.rd
                and self.rs1 == other.rs1 and self.rs2 == other.rs2
                and self.imm == other.imm and self.raw == other.raw)

    def __hash__(self):
        return hash((self.mnemonic, self.rd, self.rs1, self.rs2, self.imm))

    def __repr__(self):
        return (f"DecodedInstruction({self.mnemonic}, rd={self.rd}, "
                f"rs1={self.rs1}, rs2={self.rs2}, imm={self.imm})")


def _imm_i(word):
    return sign_extend(word >> 20, 12)


def _imm_s(word):
    return sign_extend(((word >> 25) << 5) | ((word >> 7) & 0x1F), 12)


def _imm_b(word):
    imm = (((word >> 31) & 1) << 12) | (((word >> 7) & 1) << 11) \
        | (((word >> 25) & 0x3F) << 5) | (((word >> 8) & 0xF) << 1)
    return sign_extend(imm, 13)


def _imm_u(word):
    return sign_extend(word & 0xFFFFF000, 32)


def _imm_j(word):
    imm = (((word >> 31) & 1) << 20) | (((word >> 12) & 0xFF) << 12) \
        | (((word >> 20) & 1) << 11) | (((word >> 21) & 0x3FF) << 1)
    return sign_extend(imm, 21)


# Reverse lookup tables built from ENCODINGS.
_BY_OPCODE_F3 = {}
_BY_OPCODE_F3_F7 = {}
for _name, (_fmt, _op, _f3, _f7) in ENCODINGS.items():
    if _name == "ebreak":
        continue
    if _f3 is None:
        _BY_OPCODE_F3[(_op, None)] = _name
    elif _f7 is None:
        _BY_OPCODE_F3[(_op, _f3)] = _name
    else:
        _BY_OPCODE_F3_F7[(_op, _f3, _f7)] = _name


def decode(word: int) -> DecodedInstruction:
    """Decode a 32-bit word into its unique RV32I instruction.

    FENCE, ECALL and CSR encodings decode to the distinguished mnemonic
    "unsupported" (the executor refuses them with a diagnostic); EBREAK is
    kept as its own mnemonic because it doubles as a halt request. Anything
    else outside RV32I raises IllegalInstruction.
    """
    word &= MASK32
    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    funct3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    funct7 = (word >> 25) & 0x7F

    if opcode == OP_LUI:
        return DecodedInstruction("lui", rd=rd, imm=_imm_u(word), fmt=U, raw=word)
    if opcode == OP_AUIPC:
        return DecodedInstruction("auipc", rd=rd, imm=_imm_u(word), fmt=U, raw=word)
    if opcode == OP_JAL:
        return DecodedInstruction("jal", rd=rd, imm=_imm_j(word), fmt=J, raw=word)
    if opcode == OP_JALR:
        if funct3 != 0:
            raise IllegalInstruction(word, "bad jalr funct3")
        return DecodedInstruction("jalr", rd=rd, rs1=rs1, imm=_imm_i(word), fmt=I, raw=word)
    if opcode == OP_BRANCH:
        name = _BY_OPCODE_F3.get((opcode, funct3))
        if name is None:
            raise IllegalInstruction(word, "bad branch funct3")
        return DecodedInstruction(name, rs1=rs1, rs2=rs2, imm=_imm_b(word), fmt=B, raw=word)
    if opcode == OP_LOAD:
        name = _BY_OPCODE_F3.get((opcode, funct3))
        if name is None:
            raise IllegalInstruction(word, "bad load funct3")
        return DecodedInstruction(name, rd=rd, rs1=rs1, imm=_imm_i(word), fmt=I, raw=word)
    if opcode == OP_STORE:
        name = _BY_OPCODE_F3.get((opcode, funct3))
        if name is None:
            raise IllegalInstruction(word, "bad store funct3")
        return DecodedInstruction(name, rs1=rs1, rs2=rs2, imm=_imm_s(word), fmt=S, raw=word)
    if opcode == OP_IMM:
        if funct3 == 0b001:
            if funct7 != 0b0000000:
                raise IllegalInstruction(word, "bad slli funct7")
            return DecodedInstruction("slli", rd=rd, rs1=rs1, imm=rs2, fmt=I, raw=word)
        if funct3 == 0b101:
            name = _BY_OPCODE_F3_F7.get((opcode, funct3, funct7))
            if name is None:
                raise IllegalInstruction(word, "bad shift funct7")
            return DecodedInstruction(name, rd=rd, rs1=rs1, imm=rs2, fmt=I, raw=word)
        name = _BY_OPCODE_F3.get((opcode, funct3))
        if name is None:
            raise IllegalInstruction(word, "bad op-imm funct3")
        return DecodedInstruction(name, rd=rd, rs1=rs1, imm=_imm_i(word), fmt=I, raw=word)
    if opcode == OP_REG:
        name = _BY_OPCODE_F3_F7.get((opcode, funct3, funct7))
        if name is None:
            raise IllegalInstruction(word, "bad op funct fields")
        return DecodedInstruction(name, rd=rd, rs1=rs1, rs2=rs2, fmt=R, raw=word)
    if opcode == OP_SYSTEM:
        if word == 0x00100073:
            return DecodedInstruction("ebreak", fmt=I, raw=word)
        # ECALL and all CSR forms: reserved but not executable here.
        return DecodedInstruction("unsupported", fmt=I, raw=word)
    if opcode == OP_MISC_MEM:
        # FENCE / FENCE.I: reserved but not executable here.
        return DecodedInstruction("unsupported", fmt=I, raw=word)
    raise IllegalInstruction(word)


def encode(dec: DecodedInstruction) -> int:
    """Re-encode a decoded instruction; inverse of decode on legal words."""
    if dec.mnemonic == "unsupported":
        return dec.raw & MASK32
    fmt, opcode, funct3, funct7 = ENCODINGS[dec.mnemonic]
    if dec.mnemonic == "ebreak":
        return 0x00100073
    if fmt == R:
        return (funct7 << 25) | (dec.rs2 << 20) | (dec.rs1 << 15) \
            | (funct3 << 12) | (dec.rd << 7) | opcode
    if fmt == I:
        if dec.mnemonic in ("slli", "srli", "srai"):
            shamt = dec.imm & 0x1F
            return (funct7 << 25) | (shamt << 20) | (dec.rs1 << 15) \
                | (funct3 << 12) | (dec.rd << 7) | opcode
        imm = dec.imm & 0xFFF
        return (imm << 20) | (dec.rs1 << 15) | (funct3 << 12) | (dec.rd << 7) | opcode
    if fmt == S:
        imm = dec.imm & 0xFFF
        return ((imm >> 5) << 25) | (dec.rs2 << 20) | (dec.rs1 << 15) \
            | (funct3 << 12) | ((imm & 0x1F) << 7) | opcode
    if fmt == B:
        imm = dec.imm & 0x1FFF
        return (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25) \
            | (dec.rs2 << 20) | (dec.rs1 << 15) | (funct3 << 12) \
            | (((imm >> 1) & 0xF) << 8) | (((imm >> 11) & 1) << 7) | opcode
    if fmt == U:
        return (dec.imm & 0xFFFFF000) | (dec.rd << 7) | opcode
    if fmt == J:
        imm = dec.imm & 0x1FFFFF
        return (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21) \
            | (((imm >> 11) & 1) << 20) | (((imm >> 12) & 0xFF) << 12) \
            | (dec.rd << 7) | opcode
    raise ValueError(f"unknown format {fmt}")


_DECODE_CACHE: dict = {}


def decode_cached(word: int) -> DecodedInstruction:
    """decode() with memoization; timing models call this every fetch."""
    dec = _DECODE_CACHE.get(word)
    if dec is None:
        dec = decode(word)
        _DECODE_CACHE[word] = dec
    return dec
