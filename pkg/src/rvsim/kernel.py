"""Bare-metal kernel wrapper generation.

The wrapper zeroes every register, gives each hart its own stack pointer,
dispatches hart N to main()/hartN_main() through the memory-mapped hart-id
register, and parks returning harts in an idle loop that the simulators
recognize as the halt condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .asm import AsmError, Assembler

DEFAULT_STACK_POINTER = 0x7FC  # 2044
DEFAULT_STACK_SIZE = 512


class KernelError(Exception):
    pass


class MissingHartMain(KernelError):
    def __init__(self, hart):
        super().__init__(f"program does not define hart{hart}_main")
        self.hart = hart


class InvalidStackLayout(KernelError):
    pass


@dataclass
class KernelParams:
    stack_pointer: int = DEFAULT_STACK_POINTER
    stack_size: int = DEFAULT_STACK_SIZE
    harts: int = 1

    def hart_sp(self, hart):
        return self.stack_pointer - hart * self.stack_size

    def validate(self):
        if self.harts < 1:
            raise KernelError("hart count must be >= 1")
        for h in range(self.harts):
            if self.hart_sp(h) < 0:
                raise InvalidStackLayout(
                    f"hart {h} stack pointer {self.hart_sp(h)} below zero")


def _app_labels(app_text):
    a = Assembler(app_text)
    a.first_pass()
    return a.labels


def wrap_kernel(app_text: str, params: KernelParams | None = None) -> str:
    """Prefix application source with the bare-metal startup wrapper."""
    params = params or KernelParams()
    params.validate()
    labels = _app_labels(app_text)
    if "main" not in labels:
        raise KernelError("program does not define main")
    for h in range(1, params.harts):
        if f"hart{h}_main" not in labels:
            raise MissingHartMain(h)

    lines = ["_start:"]
    for r in range(1, 32):
        lines.append(f"    addi x{r}, x0, 0")
    if params.harts > 1:
        # Hart id register read; dispatch chain compares against each index.
        lines.append("    addi t0, x0, -16          # hart-id register")
        lines.append("    lw   t0, 0(t0)")
        for h in range(params.harts):
            target = "main" if h == 0 else f"hart{h}_main"
            lines.append(f"_dispatch_{h}:")
            if h < params.harts - 1:
                lines.append(f"    li   t1, {h}")
                lines.append(f"    bne  t0, t1, _dispatch_{h + 1}")
            lines.append(f"    li   sp, 0x{params.hart_sp(h):x}")
            lines.append(f"    jal  ra, {target}")
            lines.append("    j    _kernel_halt")
    else:
        lines.append(f"    li   sp, 0x{params.hart_sp(0):x}")
        lines.append("    jal  ra, main")
    lines.append("_kernel_halt:")
    lines.append("    j    _kernel_halt")
    lines.append("")
    wrapper = "\n".join(lines)
    try:
        Assembler(wrapper + app_text).first_pass()
    except AsmError as e:
        raise KernelError(f"wrapper conflicts with application: {e}") from e
    return wrapper + app_text


# Shift-add multiply and shift-subtract remainder routines. RV32M is out of
# scope, so benchmarks link these instead. Both clobber only t4-t6.
MULTIPLY_LIB = """
# a0 = a0 * a1 (low 32 bits, unsigned shift-add)
__umul:
    mv   t4, a0
    addi a0, x0, 0
__umul_loop:
    beqz a1, __umul_done
    andi t5, a1, 1
    beqz t5, __umul_skip
    add  a0, a0, t4
__umul_skip:
    slli t4, t4, 1
    srli a1, a1, 1
    j    __umul_loop
__umul_done:
    ret

# a0 = a0 mod a1 (unsigned, a1 >= 1, shift-subtract). The reduce loop runs
# two branchless masked-subtract steps per pass: a step subtracts the shifted
# divisor only when it still fits and is still >= the divisor, so overshoot
# steps are harmless no-ops.
__urem:
    bltu a0, a1, __urem_done
    mv   t4, a1
    srli t6, a0, 1
__urem_align:
    bltu t6, t4, __urem_reduce
    slli t4, t4, 1
    bltu t6, t4, __urem_reduce
    slli t4, t4, 1
    bltu t6, t4, __urem_reduce
    slli t4, t4, 1
    bltu t6, t4, __urem_reduce
    slli t4, t4, 1
    j    __urem_align
__urem_reduce:
    sltu t5, a0, t4
    sltu t6, t4, a1
    or   t5, t5, t6
    addi t5, t5, -1
    and  t5, t5, t4
    sub  a0, a0, t5
    srli t4, t4, 1
    sltu t5, a0, t4
    sltu t6, t4, a1
    or   t5, t5, t6
    addi t5, t5, -1
    and  t5, t5, t4
    sub  a0, a0, t5
    srli t4, t4, 1
    bgeu t4, a1, __urem_reduce
__urem_done:
    ret

# a0 = a0 * a1 for signed values (low 32 bits)
__mul:
    addi t6, x0, 0
    bge  a0, x0, __mul_a_pos
    sub  a0, x0, a0
    xori t6, t6, 1
__mul_a_pos:
    bge  a1, x0, __mul_b_pos
    sub  a1, x0, a1
    xori t6, t6, 1
__mul_b_pos:
    bgeu a1, a0, __mul_noswap
    mv   t4, a0
    mv   a0, a1
    mv   a1, t4
__mul_noswap:
    mv   t4, a0
    addi a0, x0, 0
__mul_loop:
    beqz a1, __mul_sign
    andi t5, a1, 1
    beqz t5, __mul_skip
    add  a0, a0, t4
__mul_skip:
    slli t4, t4, 1
    srli a1, a1, 1
    j    __mul_loop
__mul_sign:
    beqz t6, __mul_done
    sub  a0, x0, a0
__mul_done:
    ret
"""
