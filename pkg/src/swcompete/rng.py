"""Seeding contract.

Every run is driven by one 64-bit seed. The seed's ``SeedSequence`` is split
into two independent child streams: the graph stream (consumed by rewiring)
and the dynamics stream (consumed by state initialisation, then by the
update steps in order). Keeping them separate lets a shared graph be paired
with the same dynamics draws as a per-seed graph.
"""

from __future__ import annotations

import numpy as np


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    graph_ss, dyn_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(graph_ss)), np.random.Generator(np.random.PCG64(dyn_ss))


def dynamics_stream(seed: int) -> np.random.Generator:
    return seed_streams(seed)[1]
