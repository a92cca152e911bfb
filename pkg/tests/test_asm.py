"""Assembler checks: encodings vs the reference disassembler, labels,
pseudo-instruction expansion and error reporting."""

import random

import pytest

from rvsim.asm import (DuplicateLabel, ImmediateOutOfRange, ParseError,
                       UndefinedLabel, assemble, assemble_with_labels)
from rvsim.isa import decode

from oracle_rv32i import reference_disassemble


def words_of(text):
    img = assemble(text)
    return [img.words[k] for k in sorted(img.words)]


def test_addi_example():
    assert words_of("addi x1, x0, 5") == [0x00500093]


def test_self_branch_offset_zero():
    (word,) = words_of("loop: beq x0, x0, loop")
    name, fields = reference_disassemble(word)
    assert name == "beq" and fields["imm"] == 0


def test_immediate_out_of_range():
    with pytest.raises(ImmediateOutOfRange):
        assemble("addi x1, x0, 4096")


def test_undefined_and_duplicate_labels():
    with pytest.raises(UndefinedLabel):
        assemble("j nowhere")
    with pytest.raises(DuplicateLabel):
        assemble("a:\na:\n  nop")


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as e:
        assemble("nop\nbogus x1, x2\n")
    assert e.value.lineno == 2


def test_comments_and_case():
    assert words_of("ADDI X1, ZERO, 5   # comment\n// whole line") == [0x00500093]


def test_abi_register_names():
    assert words_of("addi a0, sp, -4") == words_of("addi x10, x2, -4")


def test_pseudo_expansion():
    assert words_of("nop") == [0x00000013]
    assert words_of("mv x1, x2") == words_of("addi x1, x2, 0")
    assert words_of("ret") == words_of("jalr x0, x1, 0")
    assert words_of("j next\nnext:") == words_of("jal x0, next\nnext:")
    assert words_of("beqz x5, l\nl:") == words_of("beq x5, x0, l\nl:")
    assert words_of("bnez x5, l\nl:") == words_of("bne x5, x0, l\nl:")


def test_li_small_and_large():
    (w,) = words_of("li x1, -5")
    assert decode(w).mnemonic == "addi" and decode(w).imm == -5
    ws = words_of("li x1, 0x12345678")
    assert len(ws) == 2
    assert [decode(w).mnemonic for w in ws] == ["lui", "addi"]


def test_la_resolves_label_address():
    img = assemble(".org 0x40\ntarget: .word 7\n.org 0x80\nmain: la x5, target")
    ws = [img.words[0x80 >> 2], img.words[(0x80 >> 2) + 1]]
    assert [decode(w).mnemonic for w in ws] == ["lui", "addi"]


def test_word_directive_and_org():
    img = assemble(".org 0x10\n.word 0xDEADBEEF, 5")
    assert img.words == {4: 0xDEADBEEF, 5: 5}


def test_load_store_operand_forms():
    assert words_of("lw x1, 8(x2)")
    assert words_of("sw x1, -4(sp)")
    with pytest.raises(ParseError):
        assemble("lw x1, x2")


def test_entry_point_uses_start_then_main():
    img, labels = assemble_with_labels("nop\nmain: nop")
    assert img.entry == labels["main"] == 4
    img2, _ = assemble_with_labels("nop\n_start: nop\nmain: nop")
    assert img2.entry == 4


def _random_source(rng):
    lines = []
    regs = [f"x{rng.randrange(32)}" for _ in range(3)]
    choice = rng.random()
    if choice < 0.3:
        op = rng.choice(["add", "sub", "and", "or", "xor", "slt", "sltu",
                         "sll", "srl", "sra"])
        lines.append(f"{op} {regs[0]}, {regs[1]}, {regs[2]}")
    elif choice < 0.55:
        op = rng.choice(["addi", "andi", "ori", "xori", "slti", "sltiu"])
        lines.append(f"{op} {regs[0]}, {regs[1]}, {rng.randrange(-2048, 2048)}")
    elif choice < 0.7:
        op = rng.choice(["slli", "srli", "srai"])
        lines.append(f"{op} {regs[0]}, {regs[1]}, {rng.randrange(32)}")
    elif choice < 0.8:
        op = rng.choice(["lw", "lb", "lbu", "lh", "lhu"])
        lines.append(f"{op} {regs[0]}, {rng.randrange(-2048, 2048)}({regs[1]})")
    elif choice < 0.9:
        op = rng.choice(["sw", "sb", "sh"])
        lines.append(f"{op} {regs[0]}, {rng.randrange(-2048, 2048)}({regs[1]})")
    else:
        lines.append(f"lui {regs[0]}, {rng.randrange(1 << 20)}")
    return "\n".join(lines)


def test_assembled_words_agree_with_reference_disassembler():
    rng = random.Random(31337)
    for _ in range(2000):
        src = _random_source(rng)
        (word,) = words_of(src)
        ref = reference_disassemble(word)
        assert ref is not None, f"{src!r} produced non-RV32I 0x{word:08x}"
        mnemonic = src.split()[0]
        assert ref[0] == mnemonic, f"{src!r} -> {ref[0]}"
        # The decoder must agree with the source operands too.
        dec = decode(word)
        assert dec.mnemonic == mnemonic


def test_branch_range_checked():
    src = "start: nop\n" + "\n".join(["nop"] * 2000) + "\nbeq x0, x0, start"
    with pytest.raises(ImmediateOutOfRange):
        assemble(src)
