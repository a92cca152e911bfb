"""Functional executor semantics, halt convention and differential checks."""

import random

import pytest

from rvsim import isa
from rvsim.golden import (ArchState, MemoryOutOfBounds, MisalignedAccess,
                          StepLimitExceeded, UnsupportedInstruction,
                          run_golden, step, trace_text)
from rvsim.isa import DecodedInstruction, encode

from oracle_interp import BruteState, brute_step


def _state(words, regs=None, mem_words=4096):
    st = ArchState(mem_words=mem_words)
    for i, w in enumerate(words):
        st.mem[i] = w
    for r, v in (regs or {}).items():
        st.regs[r] = v & 0xFFFFFFFF
    return st


def _enc(name, **kw):
    return encode(DecodedInstruction(name, fmt=isa.ENCODINGS[name][0], **kw))


def test_add_example():
    st = _state([_enc("add", rd=3, rs1=1, rs2=2)], regs={1: 5, 2: 7})
    rec = step(st)
    assert st.regs[3] == 12 and st.pc == 4
    assert rec.rd == 3 and rec.value == 12


def test_srai_sign_extends():
    st = _state([_enc("srai", rd=2, rs1=1, imm=4)], regs={1: 0x80000000})
    step(st)
    assert st.regs[2] == 0xF8000000


def test_beq_x0_always_taken():
    st = _state([0] * 80)
    st.mem[0x100 >> 2] = _enc("beq", rs1=0, rs2=0, imm=8)
    st.pc = 0x100
    step(st)
    assert st.pc == 0x108


def test_x0_writes_discarded():
    st = _state([_enc("addi", rd=0, rs1=0, imm=77)])
    rec = step(st)
    assert st.regs[0] == 0 and rec.rd == 0 and rec.value == 0


def test_store_load_byte_lanes():
    prog = [
        _enc("addi", rd=1, rs1=0, imm=0x7A),
        _enc("sb", rs1=0, rs2=1, imm=0x101),
        _enc("lbu", rd=2, rs1=0, imm=0x101),
        _enc("lw", rd=3, rs1=0, imm=0x100),
    ]
    st = _state(prog)
    for _ in prog:
        step(st)
    assert st.regs[2] == 0x7A
    assert st.regs[3] == 0x7A00


def test_misaligned_lw_is_error():
    st = _state([_enc("lw", rd=1, rs1=0, imm=2)])
    with pytest.raises(MisalignedAccess):
        step(st)


def test_out_of_bounds_store():
    st = _state([_enc("sw", rs1=0, rs2=0, imm=0)], mem_words=16)
    st.mem[0] = _enc("sw", rs1=1, rs2=0, imm=0)
    st.regs[1] = 0x10000
    with pytest.raises(MemoryOutOfBounds):
        step(st)


def test_unsupported_raises():
    st = _state([0x00000073])  # ecall
    with pytest.raises(UnsupportedInstruction):
        step(st)


def test_hart_id_register():
    st = _state([_enc("addi", rd=1, rs1=0, imm=-16),
                 _enc("lw", rd=2, rs1=1, imm=0)])
    st.hart_id = 3
    step(st)
    step(st)
    assert st.regs[2] == 3


def test_halt_on_self_jump():
    image = {0: _enc("jal", rd=0, imm=0)}
    trace, state = run_golden(image, mem_words=64)
    assert state.halted
    assert len(trace) == 1  # the idle jump retires exactly once


def test_halt_on_ebreak():
    image = {0: _enc("addi", rd=1, rs1=0, imm=1), 1: 0x00100073}
    trace, state = run_golden(image, mem_words=64)
    assert state.halted and len(trace) == 2


def test_step_limit():
    # Two-instruction loop never satisfies the self-jump halt rule.
    image = {0: _enc("jal", rd=0, imm=4), 1: _enc("jal", rd=0, imm=-4)}
    with pytest.raises(StepLimitExceeded):
        run_golden(image, max_steps=100, mem_words=64)


def test_determinism():
    image = {0: _enc("addi", rd=1, rs1=0, imm=3),
             1: _enc("add", rd=2, rs1=1, rs2=1),
             2: _enc("jal", rd=0, imm=0)}
    t1, _ = run_golden(image, mem_words=64)
    t2, _ = run_golden(image, mem_words=64)
    assert [r.key() for r in t1] == [r.key() for r in t2]


def test_trace_text_format():
    image = {0: _enc("addi", rd=1, rs1=0, imm=5), 1: _enc("jal", rd=0, imm=0)}
    trace, _ = run_golden(image, mem_words=64)
    lines = trace_text(trace).splitlines()
    assert lines[0] == "pc=00000000 instr=00500093 rd=1 val=00000005"


def _random_program(rng, n_instr):
    """Random straight-line instructions; loads/stores sandboxed to one page."""
    words = []
    for _ in range(n_instr):
        kind = rng.random()
        rd = rng.randrange(31)  # keep x31 as the sandbox anchor
        rs1 = rng.randrange(32)
        rs2 = rng.randrange(32)
        if kind < 0.55:
            name = rng.choice(["add", "sub", "and", "or", "xor", "sll", "srl",
                               "sra", "slt", "sltu"])
            words.append(_enc(name, rd=rd, rs1=rs1, rs2=rs2))
        elif kind < 0.8:
            name = rng.choice(["addi", "andi", "ori", "xori", "slti", "sltiu"])
            words.append(_enc(name, rd=rd, rs1=rs1, imm=rng.randrange(-2048, 2048)))
        elif kind < 0.88:
            words.append(_enc(rng.choice(["slli", "srli", "srai"]),
                              rd=rd, rs1=rs1, imm=rng.randrange(32)))
        elif kind < 0.94:
            words.append(_enc("lui", rd=rd,
                              imm=isa.sign_extend(rng.randrange(1 << 20) << 12, 32)))
        else:
            # Sandbox region: x31 anchors 0x800, offsets 0..127 words.
            off = rng.randrange(128) * 4
            if rng.random() < 0.5:
                words.append(_enc("sw", rs1=31, rs2=rs2, imm=off))
            else:
                words.append(_enc("lw", rd=rd, rs1=31, imm=off))
    words.append(0x00100073)  # ebreak
    return words


def test_differential_vs_brute_interpreter():
    rng = random.Random(42)
    for trial in range(60):
        prog = _random_program(rng, 40)
        image = {i: w for i, w in enumerate(prog)}

        st = ArchState(mem_words=1024)
        st.load_image(image)
        st.regs[31] = 0x800
        while not st.halted:
            step(st)

        bs = BruteState(mem_words=1024)
        bs.load_words(image)
        bs.x[31] = 0x800
        while not bs.halted:
            brute_step(bs)

        assert st.regs == bs.x, f"trial {trial} register mismatch"
        for waddr in range(1024):
            assert st.mem[waddr] == bs.rd_word(waddr * 4), (
                f"trial {trial} mem[{waddr:#x}]")
