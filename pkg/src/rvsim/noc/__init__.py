from .flit import Flit, make_packet
from .network import Network, NetworkInterface
from .router import Router, RouterParams
from .topology import InvalidTopology, build_topology, route_compute
