"""Agent-based competition between groups on Watts-Strogatz small-world networks."""

from .errors import ConfigError, DomainError
from .graph import (
    Graph,
    PathLength,
    WsConfig,
    build_ring_lattice,
    characteristic_path_length,
    clustering_coefficient,
    rewire,
    watts_strogatz,
)

__version__ = "0.1.0"
