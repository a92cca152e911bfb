"""Whole-system assembly from a resolved configuration."""

from __future__ import annotations

from ..cores import make_core
from ..golden import SimError
from ..mem.cache import CacheParams
from ..mem.hierarchy import CoherentHierarchy
from ..mem.memory import MemoryComponent, MemoryStorage
from ..noc import Network, RouterParams, build_topology
from ..ports import DirectMem, MemPort
from .config import normalize


class BuildError(SimError):
    pass


class ProgramImageTooLarge(BuildError):
    pass


REQ_FILL, REQ_WB = 1, 2


class NodeMap:
    """Distributed memory map: which node owns an address, plus packet I/O.

    Word addresses are split into equal contiguous chunks; fills for remote
    chunks become a single request flit to the owner, answered by a head
    plus one body flit per line word. Write-backs are head plus data flits.
    """

    def __init__(self, ni, total_words, n_nodes, home):
        self.ni = ni
        self.chunk = total_words // n_nodes
        self.n_nodes = n_nodes
        self.home = home
        self.pending = {}
        self.next_packet = 1
        ni.on_packet = self._receive

    def owner(self, addr):
        node = (addr >> 2) // self.chunk
        if node >= self.n_nodes:
            from ..mem.memiface import AddressUnmapped
            raise AddressUnmapped(f"no node owns address 0x{addr:08x}")
        return node

    def is_local(self, addr):
        return self.owner(addr) == self.home

    def send_fill_request(self, base, words):
        pid = self._pid()
        self.pending[base] = None
        header = (REQ_FILL << 28) | (words << 22) | (base >> 2)
        self.ni.send_packet(pid, self.owner(base), [header])

    def send_writeback(self, base, data):
        pid = self._pid()
        self.pending[base] = None
        header = (REQ_WB << 28) | (len(data) << 22) | (base >> 2)
        self.ni.send_packet(pid, self.owner(base), [header] + list(data))

    def poll(self, base):
        got = self.pending.get(base)
        if got is not None:
            del self.pending[base]
        return got

    def _receive(self, packet_id, src, payloads):
        base = (payloads[0] & 0x3FFFFF) << 2
        if len(payloads) == 1:
            self.pending[base] = True   # write-back acknowledged
        else:
            self.pending[base] = payloads[1:]

    def _pid(self):
        self.next_packet += 1
        return self.next_packet


class NodeMemoryController:
    """Serves fill/write-back packets against one node's memory slice."""

    def __init__(self, node, ni, storage, latency):
        self.node = node
        self.ni = ni
        self.storage = storage
        self.port = MemPort(f"node{node}-mem")
        self.memory = MemoryComponent(storage, [self.port], latency,
                                      f"node{node}-mem")
        self.jobs = []            # queued request packets
        self.active = None
        self.seq = 0
        self.next_packet = 1_000_000 * (node + 1)
        ni.on_packet = self._receive

    def _receive(self, packet_id, src, payloads):
        self.jobs.append((src, payloads))

    def tick(self):
        self.memory.tick()
        if self.active is None:
            if not self.jobs:
                return
            src, payloads = self.jobs.pop(0)
            header = payloads[0]
            kind = header >> 28
            words = (header >> 22) & 0x3F
            base = (header & 0x3FFFFF) << 2
            self.active = {"kind": kind, "src": src, "base": base,
                           "words": words, "data": list(payloads[1:]),
                           "out": [], "idx": 0, "tag": None}
        a = self.active
        if a["tag"] is not None:
            resp = self.port.take(a["tag"])
            if resp is None:
                return
            a["tag"] = None
            if a["kind"] == REQ_FILL:
                a["out"].append(resp.data)
            a["idx"] += 1
            if a["idx"] >= a["words"]:
                self._finish()
                return
        if self.port.can_post():
            from ..ports import Request
            self.seq += 1
            addr = a["base"] + 4 * a["idx"]
            if a["kind"] == REQ_FILL:
                self.port.post(Request("read", addr, tag=self.seq))
            else:
                self.port.post(Request("write", addr, a["data"][a["idx"]],
                                       0xFFFFFFFF, tag=self.seq))
            a["tag"] = self.seq

    def _finish(self):
        a = self.active
        self.active = None
        self.next_packet += 1
        header = a["base"] >> 2
        if a["kind"] == REQ_FILL:
            self.ni.send_packet(self.next_packet, a["src"], [header] + a["out"])
        else:
            self.ni.send_packet(self.next_packet, a["src"], [header])

    def latch(self):
        self.port.latch()


def _cache_params(entry, level, seed):
    return CacheParams(index_bits=entry["index_bits"],
                       offset_bits=entry["offset_bits"], ways=entry["ways"],
                       replacement=entry["replacement"], level=level,
                       seed=entry.get("seed", seed))


class SystemInstance:
    """Everything run() needs: cores plus the clocked component groups."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.cores = []
        self.groups = []          # ordered lists of components with .tick()
        self.latches = []         # objects with .latch()
        self.hierarchy = None
        self.network = None
        self.node_controllers = []
        self.memories = []
        self.storages = []        # (storage, base_word) for final memory view
        self.cycle = 0

    def tick_components(self, perm=None):
        for gi, group in enumerate(self.groups):
            order = group
            if perm is not None and len(group) > 1:
                order = list(group)
                perm.shuffle(order)
            for comp in order:
                comp.tick()

    def latch_all(self):
        for obj in self.latches:
            obj.latch()

    def final_memory(self):
        """Flat word dict after draining all caches (debug view)."""
        if self.hierarchy is not None:
            if self.network is not None:
                by_base = sorted(self.storages, key=lambda s: s[1])

                def write_word(waddr, value):
                    for storage, base in by_base:
                        if base <= waddr < base + storage.size:
                            storage.words[waddr - base] = value
                            return
                    raise BuildError(f"drained word 0x{waddr:x} unowned")

                self.hierarchy.drain(write_word)
            else:
                self.hierarchy.drain()
        out = {}
        for storage, base in self.storages:
            for i, word in enumerate(storage.words):
                out[base + i] = word
        return out


def build_system(cfg, image):
    """Construct a SystemInstance from a config dict and a MemoryImage."""
    resolved, errors, _warnings = normalize(cfg)
    if errors:
        raise BuildError("invalid configuration: " + "; ".join(errors))
    mem_words = 1 << resolved["memory"]["address_bits"]
    if image.max_word_addr() >= mem_words:
        raise ProgramImageTooLarge(
            f"image needs word 0x{image.max_word_addr():x} but memory has "
            f"{mem_words} words")
    inst = SystemInstance(resolved)
    kind = resolved["interconnect"]["kind"]
    if kind == "none":
        _build_direct(inst, resolved, image, mem_words)
    elif kind == "shared-bus":
        _build_coherent(inst, resolved, image, mem_words, remote=None)
    else:
        _build_noc(inst, resolved, image, mem_words)
    for i, core in enumerate(inst.cores):
        core.pc = image.entry
    return inst


def _mem_latency(resolved):
    return resolved["memory"]["latency"]


def _build_direct(inst, resolved, image, mem_words):
    if len(resolved["cores"]) != 1:
        raise BuildError("interconnect 'none' supports a single core")
    mem = resolved["memory"]
    core_cfg = resolved["cores"][0]
    if mem["layout"] == "unified":
        store = MemoryStorage(mem_words, "mem")
        store.load_image(image)
        istore = dstore = store
        inst.storages.append((store, 0))
    else:
        istore = MemoryStorage(mem_words, "imem")
        dstore = MemoryStorage(mem_words, "dmem")
        istore.load_image(image)
        dstore.load_image(image)
        inst.storages.append((dstore, 0))
    variant = core_cfg["variant"]
    direct_ok = mem["kind"] == "asynchronous" and variant in (
        "single-cycle", "five-stage-stall", "five-stage-bypass")
    if direct_ok:
        imem, dmem = DirectMem(istore), DirectMem(dstore)
    else:
        iport, dport = MemPort("i0"), MemPort("d0")
        latency = max(1, _mem_latency(resolved))
        icomp = MemoryComponent(istore, [iport], latency, "imem")
        dcomp = icomp if istore is dstore else MemoryComponent(
            dstore, [dport], latency, "dmem")
        if istore is dstore:
            icomp.add_port(dport)
        inst.groups.append([icomp] if icomp is dcomp else [icomp, dcomp])
        inst.latches.extend([iport, dport])
        imem, dmem = iport, dport
    core = make_core(variant, 0, imem, dmem, name="core0",
                     queue_length=core_cfg["queue_length"],
                     alu_latencies=core_cfg["alu_latencies"])
    inst.cores.append(core)


def _l1_params_for(resolved, seed):
    caches = resolved["caches"]
    per_core = caches.get("per_core", {})
    params = []
    names = []
    for i in range(len(resolved["cores"])):
        override = per_core.get(str(i), {})
        for level in ("l1i", "l1d"):
            entry = override.get(level) or caches[level]
            params.append(_cache_params(entry, "L1",
                                        seed + 7919 * len(params)))
            names.append(f"core{i}.{level}")
    return params, names


def _build_coherent(inst, resolved, image, mem_words, remote, storage=None):
    seed = resolved["seed"]
    caches = resolved["caches"]
    if caches is None:
        raise BuildError("the coherent hierarchy requires a cache configuration")
    l1_params, names = _l1_params_for(resolved, seed)
    l2_params = _cache_params(caches["l2"], "Lx", seed + 104729)
    if storage is None and remote is None:
        storage = MemoryStorage(mem_words, "mem")
        storage.load_image(image)
        inst.storages.append((storage, 0))
    hier = CoherentHierarchy(l1_params, l2_params, storage,
                             mem_latency=max(1, _mem_latency(resolved)),
                             names=names, remote=remote)
    inst.hierarchy = hier
    inst.latches.append(_HierarchyLatch(hier))
    inst.groups.append([hier])
    for i, core_cfg in enumerate(resolved["cores"]):
        iport = hier.cpu_ports[2 * i]
        dport = hier.cpu_ports[2 * i + 1]
        core = make_core(core_cfg["variant"], i, iport, dport, name=f"core{i}",
                         queue_length=core_cfg["queue_length"],
                         alu_latencies=core_cfg["alu_latencies"])
        inst.cores.append(core)
    return hier


class _HierarchyLatch:
    def __init__(self, hier):
        self.hier = hier

    def latch(self):
        self.hier.latch()


class _NetLatch:
    def __init__(self, net):
        self.net = net

    def latch(self):
        self.net.latch()


def _build_noc(inst, resolved, image, mem_words):
    inter = resolved["interconnect"]
    topo = build_topology("mesh", width=inter["width"], height=inter["height"])
    params = RouterParams(vcs=inter["virtual_channels"],
                          depth=inter["vc_depth"], variant=inter["router"],
                          stages=inter["router_stages"],
                          routing=inter["routing"])
    net = Network(topo, params)
    inst.network = net
    n_nodes = topo.n_nodes
    if mem_words % n_nodes:
        raise BuildError("memory words must divide evenly across NoC nodes")
    chunk = mem_words // n_nodes
    home = inter["llc_node"]
    node_map = NodeMap(net.nis[home], mem_words, n_nodes, home)
    latency = max(1, _mem_latency(resolved))
    home_storage = None
    for node in range(n_nodes):
        storage = MemoryStorage(chunk, f"node{node}-mem",
                                base_word=node * chunk)
        for waddr, word in image.items():
            if node * chunk <= waddr < (node + 1) * chunk:
                storage.words[waddr - node * chunk] = word
        inst.storages.append((storage, node * chunk))
        if node == home:
            home_storage = storage
            continue
        ctrl = NodeMemoryController(node, net.nis[node], storage, latency)
        inst.node_controllers.append(ctrl)
        inst.latches.append(ctrl)
    hier = _build_coherent(inst, resolved, image, mem_words, remote=node_map,
                           storage=None)
    # The home node's slice is served by the hierarchy's own memory port.
    hier.memiface.port = hier.mem_port
    hier.memory = MemoryComponent(home_storage, [hier.mem_port], latency,
                                  f"node{home}-mem")
    hier.storage = home_storage
    inst.groups.insert(0, [net])
    if inst.node_controllers:
        inst.groups.insert(1, list(inst.node_controllers))
    inst.latches.append(_NetLatch(net))
    return hier
