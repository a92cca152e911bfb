"""Bundled benchmark correctness on the functional model."""

import pytest
import sympy

from rvsim.golden import run_golden
from rvsim.system.benchmarks import (BENCH_MEM_WORDS, RESULT_BASE,
                                     benchmark_names, build_benchmark)

M32 = 0xFFFFFFFF


def _run(image, hart_id=0):
    return run_golden(image, mem_words=BENCH_MEM_WORDS, hart_id=hart_id)


def test_factorial_result():
    _, state = _run(build_benchmark("factorial"))
    assert state.regs[10] == 3628800  # 10!


def test_prime_count_below_100():
    _, state = _run(build_benchmark("prime"))
    assert state.regs[10] == 25  # pi(100)


def mandel_checksum_oracle():
    """Independent fixed-point reimplementation of the benchmark."""
    checksum = 0
    cy = -307
    for _row in range(6):
        cx = -512
        for _col in range(8):
            x = y = it = 0
            while it < 12:
                xx = (x * x) >> 8
                yy = (y * y) >> 8
                if xx + yy > 1024:
                    break
                y = ((x * y) >> 7) + cy
                x = xx - yy + cx
                it += 1
            checksum = (checksum * 31 + it) & M32
            cx += 96
        cy += 102
    return checksum


def test_mandelbrot_checksum_matches_fixed_point_oracle():
    _, state = _run(build_benchmark("mandelbrot"))
    assert state.regs[10] == mandel_checksum_oracle() == 0x6DAAE618


@pytest.mark.parametrize("harts", [1, 2, 4, 8])
def test_parallel_prime_partition_sums_to_pi(harts):
    image = build_benchmark("prime-parallel", harts=harts, limit=1000)
    counts = []
    for h in range(harts):
        _, state = _run(image, hart_id=h)
        counts.append(state.regs[10])
        # each hart stored its count in its own slot
        assert state.mem[(RESULT_BASE >> 2) + h] == state.regs[10]
    assert sum(counts) == sympy.primepi(1000) == 168


def test_benchmark_names_stable():
    assert benchmark_names() == ["factorial", "mandelbrot", "prime",
                                 "prime-parallel"]
