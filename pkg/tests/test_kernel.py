"""Kernel wrapper behavior checked by running it on the functional model."""

import pytest

from rvsim.asm import assemble
from rvsim.golden import run_golden
from rvsim.kernel import (InvalidStackLayout, KernelError, KernelParams,
                          MissingHartMain, MULTIPLY_LIB, wrap_kernel)

APP = """
main:
    mv a0, sp
    ret
"""

TWO_HART_APP = """
main:
    mv a0, sp
    ret
hart1_main:
    mv a0, sp
    ret
"""


def _final_state(text, hart_id=0):
    image = assemble(text)
    _, state = run_golden(image, entry=0, mem_words=4096, hart_id=hart_id)
    return state


def test_default_stack_pointer():
    wrapped = wrap_kernel(APP, KernelParams())
    state = _final_state(wrapped)
    assert state.regs[10] == 0x7FC  # a0 captured sp at main entry


def test_registers_zeroed_before_main():
    app = "main:\n    mv a0, t3\n    ret\n"
    state = _final_state(wrap_kernel(app, KernelParams()))
    assert state.regs[10] == 0


def test_two_hart_stack_layout():
    params = KernelParams(stack_pointer=0x7FC, stack_size=512, harts=2)
    wrapped = wrap_kernel(TWO_HART_APP, params)
    assert _final_state(wrapped, hart_id=0).regs[10] == 0x7FC
    assert _final_state(wrapped, hart_id=1).regs[10] == 0x5FC


def test_missing_hart_main():
    with pytest.raises(MissingHartMain) as e:
        wrap_kernel(APP, KernelParams(harts=2))
    assert e.value.hart == 1


def test_missing_main():
    with pytest.raises(KernelError):
        wrap_kernel("foo:\n    ret\n", KernelParams())


def test_invalid_stack_layout():
    with pytest.raises(InvalidStackLayout):
        wrap_kernel(TWO_HART_APP,
                    KernelParams(stack_pointer=0x100, stack_size=0x200, harts=2))


def test_four_hart_dispatch():
    app = "\n".join(
        [f"{'main' if h == 0 else f'hart{h}_main'}:\n    li a0, {100 + h}\n    ret"
         for h in range(4)])
    wrapped = wrap_kernel(app, KernelParams(harts=4))
    for h in range(4):
        assert _final_state(wrapped, hart_id=h).regs[10] == 100 + h


def test_multiply_library():
    app = """
main:
    mv   s1, ra
    li   a0, 123
    li   a1, 4567
    jal  ra, __umul
    mv   s2, a0
    li   a0, 100000
    li   a1, 321
    jal  ra, __urem
    add  a0, a0, s2
    li   a1, -7
    mv   s3, a0
    li   a0, 1000
    jal  ra, __mul
    add  a0, a0, s3
    mv   ra, s1
    ret
""" + MULTIPLY_LIB
    state = _final_state(wrap_kernel(app, KernelParams()))
    expected = (123 * 4567 + 100000 % 321 + 1000 * -7) & 0xFFFFFFFF
    assert state.regs[10] == expected
