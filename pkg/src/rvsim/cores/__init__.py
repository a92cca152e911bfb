from .inorder import FIVE_BYPASS, FIVE_STALL, SEVEN_BYPASS, InOrderCore
from .ooo import OOO, OooCore
from .single_cycle import SingleCycleCore

VARIANTS = ("single-cycle", FIVE_STALL, FIVE_BYPASS, SEVEN_BYPASS, OOO)


def make_core(variant, hart_id, imem, dmem, name=None, queue_length=8,
              alu_latencies=(1,)):
    """Construct a timing core of the requested variant."""
    if variant == "single-cycle":
        return SingleCycleCore(hart_id, imem, dmem, name)
    if variant in (FIVE_STALL, FIVE_BYPASS, SEVEN_BYPASS):
        return InOrderCore(hart_id, variant, imem, dmem, name)
    if variant == OOO:
        return OooCore(hart_id, imem, dmem, name,
                       queue_length=queue_length, alu_latencies=alu_latencies)
    raise ValueError(f"unknown core variant {variant!r}")
