"""Two-pass RV32I assembler.

Standard mnemonics, `#` and `//` comments, case-insensitive registers with
both numeric and ABI names, a small directive set (.word/.org/.globl) and the
usual pseudo-instructions (li, la, mv, j, jr, call, ret, nop, beqz, bnez).
"""

from __future__ import annotations

import re

from .isa import ENCODINGS, B, DecodedInstruction, I, MASK32, R, S, U, encode
from .vmh import MemoryImage


class AsmError(Exception):
    """Assembly failure; carries the 1-based source line number."""

    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            msg = f"line {lineno}: {msg}"
        super().__init__(msg)


class ParseError(AsmError):
    pass


class ImmediateOutOfRange(AsmError):
    pass


class UndefinedLabel(AsmError):
    pass


class DuplicateLabel(AsmError):
    pass


ABI_NAMES = {
    "zero": 0, "ra": 1, "sp": 2, "gp": 3, "tp": 4,
    "t0": 5, "t1": 6, "t2": 7, "s0": 8, "fp": 8, "s1": 9,
    "a0": 10, "a1": 11, "a2": 12, "a3": 13, "a4": 14, "a5": 15,
    "a6": 16, "a7": 17, "s2": 18, "s3": 19, "s4": 20, "s5": 21,
    "s6": 22, "s7": 23, "s8": 24, "s9": 25, "s10": 26, "s11": 27,
    "t3": 28, "t4": 29, "t5": 30, "t6": 31,
}

_LABEL_RE = re.compile(r"^[A-Za-z_.$][A-Za-z0-9_.$]*$")
_MEM_OPERAND_RE = re.compile(r"^(.*)\(([^)]+)\)$")


def parse_register(tok, lineno=None):
    t = tok.strip().lower()
    if t in ABI_NAMES:
        return ABI_NAMES[t]
    if t.startswith("x") and t[1:].isdigit():
        n = int(t[1:])
        if 0 <= n < 32:
            return n
    raise ParseError(f"bad register {tok!r}", lineno)


def _parse_int(tok, lineno=None):
    t = tok.strip().lower().replace("_", "")
    neg = t.startswith("-")
    if neg:
        t = t[1:]
    try:
        if t.startswith("0x"):
            val = int(t, 16)
        elif t.startswith("0b"):
            val = int(t, 2)
        else:
            val = int(t, 10)
    except ValueError:
        raise ParseError(f"bad integer {tok!r}", lineno) from None
    return -val if neg else val


def _is_int(tok):
    try:
        _parse_int(tok)
        return True
    except ParseError:
        return False


class Statement:
    """One instruction or data word scheduled at a byte address."""

    __slots__ = ("lineno", "addr", "op", "args")

    def __init__(self, lineno, addr, op, args):
        self.lineno = lineno
        self.addr = addr
        self.op = op
        self.args = args


def _strip_comment(line):
    for marker in ("#", "//"):
        idx = line.find(marker)
        if idx >= 0:
            line = line[:idx]
    return line.rstrip()


def _split_operands(rest):
    return [p.strip() for p in rest.split(",")] if rest.strip() else []


# Pseudo-instruction sizes in words; li is value-dependent.
_PSEUDO_FIXED = {
    "nop": 1, "mv": 1, "j": 1, "jr": 1, "ret": 1,
    "beqz": 1, "bnez": 1, "la": 2, "call": 1,
}


def _li_words(value):
    return 1 if -2048 <= value < 2048 else 2


class Assembler:
    def __init__(self, text):
        self.text = text
        self.labels = {}
        self.globals = []
        self.statements = []

    def first_pass(self):
        loc = 0
        for lineno, raw_line in enumerate(self.text.splitlines(), start=1):
            line = _strip_comment(raw_line).strip()
            if not line:
                continue
            while True:
                m = re.match(r"^([A-Za-z_.$][A-Za-z0-9_.$]*)\s*:\s*(.*)$", line)
                if not m:
                    break
                label, line = m.group(1), m.group(2).strip()
                if label in self.labels:
                    raise DuplicateLabel(f"duplicate label {label!r}", lineno)
                self.labels[label] = loc
            if not line:
                continue
            parts = line.split(None, 1)
            op = parts[0].lower()
            rest = parts[1] if len(parts) > 1 else ""
            args = _split_operands(rest)

            if op == ".org":
                if len(args) != 1:
                    raise ParseError(".org takes one address", lineno)
                target = _parse_int(args[0], lineno)
                if target < loc:
                    raise ParseError(".org cannot move backwards", lineno)
                if target & 3:
                    raise ParseError(".org address must be word aligned", lineno)
                loc = target
                continue
            if op == ".globl" or op == ".global":
                self.globals.extend(args)
                continue
            if op == ".word":
                if not args:
                    raise ParseError(".word needs at least one value", lineno)
                self.statements.append(Statement(lineno, loc, ".word", args))
                loc += 4 * len(args)
                continue
            if op.startswith("."):
                raise ParseError(f"unknown directive {op}", lineno)

            words = self._size_of(op, args, lineno)
            self.statements.append(Statement(lineno, loc, op, args))
            loc += 4 * words

    def _size_of(self, op, args, lineno):
        if op in _PSEUDO_FIXED:
            return _PSEUDO_FIXED[op]
        if op == "li":
            if len(args) != 2:
                raise ParseError("li takes rd, imm", lineno)
            return _li_words(_parse_int(args[1], lineno))
        if op == "jal" and len(args) == 1:
            return 1
        if op not in ENCODINGS or op == "unsupported":
            raise ParseError(f"unknown mnemonic {op!r}", lineno)
        return 1

    def _resolve(self, tok, lineno):
        if _is_int(tok):
            return _parse_int(tok, lineno)
        if _LABEL_RE.match(tok):
            if tok not in self.labels:
                raise UndefinedLabel(f"undefined label {tok!r}", lineno)
            return self.labels[tok]
        raise ParseError(f"bad operand {tok!r}", lineno)

    def _branch_offset(self, target_tok, addr, lineno):
        target = self._resolve(target_tok, lineno)
        off = target - addr
        if off & 1:
            raise ParseError("branch target not 2-byte aligned", lineno)
        if not -4096 <= off <= 4094:
            raise ImmediateOutOfRange(f"branch offset {off} out of range", lineno)
        return off

    def _jump_offset(self, target_tok, addr, lineno):
        target = self._resolve(target_tok, lineno)
        off = target - addr
        if off & 1:
            raise ParseError("jump target not 2-byte aligned", lineno)
        if not -(1 << 20) <= off <= (1 << 20) - 2:
            raise ImmediateOutOfRange(f"jump offset {off} out of range", lineno)
        return off

    def _check_imm12(self, value, lineno):
        if not -2048 <= value <= 2047:
            raise ImmediateOutOfRange(f"immediate {value} does not fit 12 bits", lineno)
        return value

    def _mem_operand(self, tok, lineno):
        m = _MEM_OPERAND_RE.match(tok.strip())
        if not m:
            raise ParseError(f"expected offset(reg), got {tok!r}", lineno)
        off_tok = m.group(1).strip()
        off = _parse_int(off_tok, lineno) if off_tok else 0
        return self._check_imm12(off, lineno), parse_register(m.group(2), lineno)

    def _encode_statement(self, st, out):
        op, args, addr, lineno = st.op, st.args, st.addr, st.lineno

        def emit(mnemonic, **fields):
            word = encode(DecodedInstruction(mnemonic,
                                             fmt=ENCODINGS[mnemonic][0], **fields))
            out.append(word)

        if op == ".word":
            for a in args:
                out.append(self._resolve(a, lineno) & MASK32)
            return

        # Pseudo-instructions expand to base encodings.
        if op == "nop":
            emit("addi", rd=0, rs1=0, imm=0)
            return
        if op == "mv":
            emit("addi", rd=parse_register(args[0], lineno),
                 rs1=parse_register(args[1], lineno), imm=0)
            return
        if op == "li":
            rd = parse_register(args[0], lineno)
            value = _parse_int(args[1], lineno)
            if not -(1 << 31) <= value < (1 << 32):
                raise ImmediateOutOfRange(f"li value {value} not 32-bit", lineno)
            value &= MASK32
            signed = value - (1 << 32) if value & 0x80000000 else value
            if -2048 <= signed < 2048:
                emit("addi", rd=rd, rs1=0, imm=signed)
                return
            lo = signed & 0xFFF
            if lo >= 0x800:
                lo -= 0x1000
            hi = (value - lo) & MASK32
            emit("lui", rd=rd, imm=hi - (1 << 32) if hi & 0x80000000 else hi)
            emit("addi", rd=rd, rs1=rd, imm=lo)
            return
        if op == "la":
            rd = parse_register(args[0], lineno)
            value = self._resolve(args[1], lineno) & MASK32
            lo = value & 0xFFF
            if lo >= 0x800:
                lo -= 0x1000
            hi = (value - lo) & MASK32
            emit("lui", rd=rd, imm=hi - (1 << 32) if hi & 0x80000000 else hi)
            emit("addi", rd=rd, rs1=rd, imm=lo)
            return
        if op == "j":
            emit("jal", rd=0, imm=self._jump_offset(args[0], addr, lineno))
            return
        if op == "call":
            emit("jal", rd=1, imm=self._jump_offset(args[0], addr, lineno))
            return
        if op == "jr":
            emit("jalr", rd=0, rs1=parse_register(args[0], lineno), imm=0)
            return
        if op == "ret":
            emit("jalr", rd=0, rs1=1, imm=0)
            return
        if op == "beqz":
            emit("beq", rs1=parse_register(args[0], lineno), rs2=0,
                 imm=self._branch_offset(args[1], addr, lineno))
            return
        if op == "bnez":
            emit("bne", rs1=parse_register(args[0], lineno), rs2=0,
                 imm=self._branch_offset(args[1], addr, lineno))
            return

        fmt = ENCODINGS[op][0]
        if op == "jal":
            if len(args) == 1:
                emit("jal", rd=1, imm=self._jump_offset(args[0], addr, lineno))
            else:
                emit("jal", rd=parse_register(args[0], lineno),
                     imm=self._jump_offset(args[1], addr, lineno))
            return
        if op == "jalr":
            if len(args) == 2 and "(" in args[1]:
                off, rs1 = self._mem_operand(args[1], lineno)
                emit("jalr", rd=parse_register(args[0], lineno), rs1=rs1, imm=off)
            elif len(args) == 3:
                emit("jalr", rd=parse_register(args[0], lineno),
                     rs1=parse_register(args[1], lineno),
                     imm=self._check_imm12(_parse_int(args[2], lineno), lineno))
            else:
                raise ParseError("jalr takes rd, rs1, imm or rd, imm(rs1)", lineno)
            return
        if op == "ebreak":
            if args:
                raise ParseError("ebreak takes no operands", lineno)
            emit("ebreak")
            return
        if fmt == B:
            if len(args) != 3:
                raise ParseError(f"{op} takes rs1, rs2, target", lineno)
            emit(op, rs1=parse_register(args[0], lineno),
                 rs2=parse_register(args[1], lineno),
                 imm=self._branch_offset(args[2], addr, lineno))
            return
        if fmt == S:
            if len(args) != 2:
                raise ParseError(f"{op} takes rs2, offset(rs1)", lineno)
            off, rs1 = self._mem_operand(args[1], lineno)
            emit(op, rs1=rs1, rs2=parse_register(args[0], lineno), imm=off)
            return
        if fmt == U:
            if len(args) != 2:
                raise ParseError(f"{op} takes rd, imm", lineno)
            value = _parse_int(args[1], lineno)
            if not 0 <= value <= 0xFFFFF:
                raise ImmediateOutOfRange(f"{op} immediate {value} not 20-bit", lineno)
            imm = value << 12
            if imm & 0x80000000:
                imm -= 1 << 32
            emit(op, rd=parse_register(args[0], lineno), imm=imm)
            return
        if op in ("lb", "lh", "lw", "lbu", "lhu"):
            if len(args) != 2:
                raise ParseError(f"{op} takes rd, offset(rs1)", lineno)
            off, rs1 = self._mem_operand(args[1], lineno)
            emit(op, rd=parse_register(args[0], lineno), rs1=rs1, imm=off)
            return
        if fmt == I:
            if len(args) != 3:
                raise ParseError(f"{op} takes rd, rs1, imm", lineno)
            imm = _parse_int(args[2], lineno)
            if op in ("slli", "srli", "srai"):
                if not 0 <= imm <= 31:
                    raise ImmediateOutOfRange(f"shift amount {imm} not in 0..31", lineno)
            else:
                self._check_imm12(imm, lineno)
            emit(op, rd=parse_register(args[0], lineno),
                 rs1=parse_register(args[1], lineno), imm=imm)
            return
        if fmt == R:
            if len(args) != 3:
                raise ParseError(f"{op} takes rd, rs1, rs2", lineno)
            emit(op, rd=parse_register(args[0], lineno),
                 rs1=parse_register(args[1], lineno),
                 rs2=parse_register(args[2], lineno))
            return
        raise ParseError(f"cannot assemble {op!r}", lineno)

    def second_pass(self):
        image = MemoryImage()
        for st in self.statements:
            words = []
            self._encode_statement(st, words)
            for i, word in enumerate(words):
                image.words[(st.addr >> 2) + i] = word & MASK32
        entry = self.labels.get("_start", self.labels.get("main", 0))
        image.entry = entry
        return image


def assemble(text: str) -> MemoryImage:
    """Assemble source text into a memory image."""
    a = Assembler(text)
    a.first_pass()
    return a.second_pass()


def assemble_with_labels(text: str):
    """assemble() variant that also returns the label table."""
    a = Assembler(text)
    a.first_pass()
    return a.second_pass(), dict(a.labels)
