"""Flits and packets for the on-chip network."""

from __future__ import annotations

HEAD, BODY, TAIL, SINGLE = "head", "body", "tail", "single"


class Flit:
    __slots__ = ("kind", "dest", "vc", "payload", "packet_id", "timestamp",
                 "src")

    def __init__(self, kind, dest, payload=0, packet_id=0, src=-1):
        self.kind = kind
        self.dest = dest
        self.vc = 0
        self.payload = payload
        self.packet_id = packet_id
        self.timestamp = None  # stamped when the first router accepts it
        self.src = src

    @property
    def is_head(self):
        return self.kind in (HEAD, SINGLE)

    @property
    def is_tail(self):
        return self.kind in (TAIL, SINGLE)

    def __repr__(self):
        return (f"Flit({self.kind}, pkt={self.packet_id}, dest={self.dest}, "
                f"vc={self.vc})")


def make_packet(packet_id, src, dest, payloads):
    """Wormhole packet: single flit, or head (body)* tail."""
    n = len(payloads)
    if n == 0:
        raise ValueError("packet needs at least one payload word")
    if n == 1:
        return [Flit(SINGLE, dest, payloads[0], packet_id, src)]
    flits = [Flit(HEAD, dest, payloads[0], packet_id, src)]
    flits += [Flit(BODY, dest, p, packet_id, src) for p in payloads[1:-1]]
    flits.append(Flit(TAIL, dest, payloads[-1], packet_id, src))
    return flits
