"""Randomized co-simulation: generated programs with loops, hazards and
memory traffic must retire identically to the golden model on every core
variant and memory system."""

import random

import pytest

from rvsim.asm import assemble
from rvsim.cores import VARIANTS
from rvsim.golden import run_golden
from rvsim.system.build import build_system
from rvsim.system.run import run

MEM_WORDS_BITS = 14
SANDBOX = 0x2000  # loads/stores confined to this region


def _random_program(rng):
    """Terminating random program: bounded counted loops, data hazards,
    sub-word memory traffic, function calls."""
    lines = ["_start:",
             f"    li   x31, 0x{SANDBOX:x}",
             f"    li   x30, {rng.randrange(4, 24)}"]
    n_blocks = rng.randrange(3, 7)
    for b in range(n_blocks):
        lines.append(f"block{b}:")
        for _ in range(rng.randrange(4, 16)):
            kind = rng.random()
            rd = rng.randrange(1, 29)
            rs1 = rng.randrange(0, 29)
            rs2 = rng.randrange(0, 29)
            if kind < 0.45:
                op = rng.choice(["add", "sub", "and", "or", "xor", "sll",
                                 "srl", "sra", "slt", "sltu"])
                lines.append(f"    {op} x{rd}, x{rs1}, x{rs2}")
            elif kind < 0.7:
                op = rng.choice(["addi", "andi", "ori", "xori"])
                lines.append(f"    {op} x{rd}, x{rs1}, {rng.randrange(-512, 512)}")
            elif kind < 0.8:
                off = rng.randrange(0, 64) * 4
                lines.append(f"    sw x{rs2}, {off}(x31)")
            elif kind < 0.9:
                off = rng.randrange(0, 64) * 4
                sub = rng.choice(["lw", "lbu", "lhu", "lb", "lh"])
                align = {"lw": off, "lbu": off + rng.randrange(4),
                         "lb": off + rng.randrange(4),
                         "lhu": off + rng.choice([0, 2]),
                         "lh": off + rng.choice([0, 2])}[sub]
                lines.append(f"    {sub} x{rd}, {align}(x31)")
            else:
                off = rng.randrange(0, 64) * 4
                sub = rng.choice(["sb", "sh"])
                align = off + (rng.randrange(4) if sub == "sb"
                               else rng.choice([0, 2]))
                lines.append(f"    {sub} x{rs2}, {align}(x31)")
        # bounded loop back to this block, then fall through
        lines.append(f"    addi x30, x30, -1")
        lines.append(f"    bnez x30, block{b}")
        lines.append(f"    li   x30, {rng.randrange(4, 16)}")
        if rng.random() < 0.4 and b + 1 < n_blocks:
            lines.append(f"    j    block{b + 1}")
    lines += ["    jal  ra, leaf",
              "halt:",
              "    j    halt",
              "leaf:",
              "    addi a0, a0, 1",
              "    ret"]
    return "\n".join(lines)


@pytest.mark.parametrize("seed", range(12))
def test_fuzz_all_variants_match_golden(seed):
    rng = random.Random(10_000 + seed)
    image = assemble(_random_program(rng))
    golden, _ = run_golden(image, mem_words=1 << MEM_WORDS_BITS,
                           max_steps=200_000)
    gkeys = [r.key() for r in golden]
    configs = [
        {"memory": {"kind": "asynchronous", "address_bits": MEM_WORDS_BITS}},
        {"memory": {"kind": "synchronous", "address_bits": MEM_WORDS_BITS}},
        {"memory": {"kind": "off-chip", "latency": 3,
                    "address_bits": MEM_WORDS_BITS}},
        {"memory": {"kind": "synchronous", "address_bits": MEM_WORDS_BITS},
         "caches": {"l1i": {"index_bits": 2, "offset_bits": 1, "ways": 2},
                    "l1d": {"index_bits": 2, "offset_bits": 1, "ways": 2},
                    "l2": {"index_bits": 4, "offset_bits": 2, "ways": 2}},
         "interconnect": {"kind": "shared-bus"}},
    ]
    for variant in VARIANTS:
        for extra in configs:
            cfg = {"cores": [{"variant": variant}], "seed": seed, **extra}
            inst = build_system(cfg, image)
            _, traces = run(inst, max_cycles=3_000_000, collect_trace=True)
            keys = [r.key() for r in traces[0]]
            assert keys == gkeys, (
                f"seed {seed}, {variant}, {extra['memory']['kind']}"
                f"{' cached' if 'caches' in extra else ''}: "
                f"first divergence at {next((i for i, (a, b) in enumerate(zip(keys, gkeys)) if a != b), 'len')}")
