"""Bundled assembly benchmarks and the parallel prime generator."""

from __future__ import annotations

from importlib import resources

from ..asm import assemble
from ..kernel import KernelParams, MULTIPLY_LIB, wrap_kernel

# Benchmark images get a roomy layout: stacks near the top of a 64k-word
# memory, per-hart result slots far from code and stacks.
BENCH_MEM_WORDS = 65536
BENCH_STACK_POINTER = 0x3FF00
BENCH_STACK_SIZE = 0x400
RESULT_BASE = 0x20000


def _bundled(name):
    return (resources.files("rvsim.system") / "benchmarks" / f"{name}.s").read_text()


def parallel_prime_source(harts: int, limit: int = 1000,
                          result_base: int = RESULT_BASE) -> str:
    """Per-hart trial division over interleaved odd candidates.

    Hart h tests candidates 3 + 2*(h + j*harts); hart 0 also counts 2. Each
    hart stores its count to result_base + 4*hart and leaves it in a0, so
    harts never touch each other's data.
    """
    parts = []
    for h in range(harts):
        fn = "main" if h == 0 else f"hart{h}_main"
        parts.append(f"""
{fn}:
    mv   s1, ra
    li   s2, {limit}
    li   s3, {1 if h == 0 else 0}
    li   s4, {3 + 2 * h}
ploop_{h}:
    bgeu s4, s2, pdone_{h}
    li   s5, 3
    li   s6, 9
pchk_{h}:
    bltu s4, s6, pyes_{h}
    mv   a0, s4
    mv   a1, s5
    jal  ra, __urem
    beqz a0, pno_{h}
    slli t0, s5, 2
    add  s6, s6, t0
    addi s6, s6, 4
    addi s5, s5, 2
    j    pchk_{h}
pyes_{h}:
    addi s3, s3, 1
pno_{h}:
    addi s4, s4, {2 * harts}
    j    ploop_{h}
pdone_{h}:
    li   t0, {result_base + 4 * h}
    sw   s3, 0(t0)
    mv   a0, s3
    mv   ra, s1
    ret
""")
    return "\n".join(parts)


BENCHMARKS = {
    "factorial": "computes 10! with shift-add multiplies; a0 = 3628800",
    "prime": "counts primes below 100 by trial division; a0 = 25",
    "mandelbrot": "fixed-point Mandelbrot on an 8x6 grid; a0 = checksum",
    "prime-parallel": "per-hart split of the prime count (parameterized limit)",
}


def benchmark_names():
    return sorted(BENCHMARKS)


def benchmark_source(name, harts=1, limit=1000):
    if name == "prime-parallel":
        return parallel_prime_source(harts, limit) + MULTIPLY_LIB
    if name not in BENCHMARKS:
        raise KeyError(f"unknown benchmark {name!r}")
    if harts != 1:
        raise ValueError(f"benchmark {name} is single-hart")
    return _bundled(name) + MULTIPLY_LIB


def kernel_params(harts=1):
    return KernelParams(stack_pointer=BENCH_STACK_POINTER,
                        stack_size=BENCH_STACK_SIZE, harts=harts)


def build_benchmark(name, harts=1, limit=1000):
    """Assembled, kernel-wrapped memory image for a bundled benchmark."""
    src = benchmark_source(name, harts=harts, limit=limit)
    wrapped = wrap_kernel(src, kernel_params(harts))
    return assemble(wrapped)
