"""Minimal single-core test rig: one core, separate I/D memories, lockstep
clock. The full system builder supersedes this for integration tests; core
unit tests keep using it so failures localize."""

from rvsim.asm import assemble
from rvsim.cores import make_core
from rvsim.golden import run_golden
from rvsim.mem.memory import DEFAULT_LATENCY, MemoryComponent, MemoryStorage
from rvsim.ports import DirectMem, MemPort

MEM_WORDS = 16384


def build_single(variant, image, mem_kind="asynchronous", mem_words=MEM_WORDS,
                 hart_id=0, **core_kw):
    imem_store = MemoryStorage(mem_words, "imem")
    dmem_store = MemoryStorage(mem_words, "dmem")
    imem_store.load_image(image)
    dmem_store.load_image(image)

    direct = (mem_kind == "asynchronous"
              and variant in ("single-cycle", "five-stage-stall", "five-stage-bypass"))
    components = []
    if direct:
        imem, dmem = DirectMem(imem_store), DirectMem(dmem_store)
        ports = []
    else:
        iport, dport = MemPort("i"), MemPort("d")
        latency = DEFAULT_LATENCY[mem_kind]
        components.append(MemoryComponent(imem_store, [iport], latency, "imem"))
        components.append(MemoryComponent(dmem_store, [dport], latency, "dmem"))
        imem, dmem = iport, dport
        ports = [iport, dport]
    core = make_core(variant, hart_id, imem, dmem, **core_kw)
    return core, components, ports


def run_core(variant, image, mem_kind="asynchronous", max_cycles=4_000_000,
             hart_id=0, entry=0, **core_kw):
    core, components, ports = build_single(variant, image, mem_kind,
                                           hart_id=hart_id, **core_kw)
    core.pc = entry
    trace = []
    core.on_retire = trace.append
    for _ in range(max_cycles):
        for comp in components:
            comp.tick()
        core.tick()
        for p in ports:
            p.latch()
        if core.halted:
            break
    else:
        raise AssertionError(f"{variant}: no halt within {max_cycles} cycles")
    return core, trace


def asm_image(text):
    return assemble(text)


def golden_trace(image, mem_words=MEM_WORDS, hart_id=0, entry=0):
    trace, state = run_golden(image, entry=entry, mem_words=mem_words,
                              hart_id=hart_id)
    return trace, state
