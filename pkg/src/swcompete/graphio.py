"""GraphML and DOT export of graphs, optionally labelled with agent groups."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .dynamics import Group
from .errors import DomainError
from .graph import Graph

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_DOT_COLORS = {"A": "green", "B": "blue", "U": "red"}


def _labels(g: Graph, states) -> list[str] | None:
    if states is None:
        return None
    if len(states) != g.n:
        raise DomainError(f"state vector length {len(states)} does not match graph size {g.n}")
    return [Group(int(s)).letter for s in states]


def write_graphml(g: Graph, path, states=None) -> None:
    labels = _labels(g, states)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<graphml xmlns="{GRAPHML_NS}">',
    ]
    if labels is not None:
        lines.append('  <key id="group" for="node" attr.name="group" attr.type="string"/>')
    lines.append('  <graph id="G" edgedefault="undirected">')
    for v in range(g.n):
        if labels is None:
            lines.append(f'    <node id="{v}"/>')
        else:
            lines.append(f'    <node id="{v}"><data key="group">{labels[v]}</data></node>')
    for u, v in g.edges():
        lines.append(f'    <edge source="{u}" target="{v}"/>')
    lines += ["  </graph>", "</graphml>"]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graphml(path) -> tuple[Graph, np.ndarray | None]:
    """Load an undirected GraphML file; nodes are renumbered in document order.

    Returns the graph and the ``group`` labels if every node carries one.
    """
    root = ET.parse(path).getroot()
    ns = {"g": GRAPHML_NS}
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise DomainError(f"{path}: no <graph> element")
    if graph_el.get("edgedefault", "directed") != "undirected":
        raise DomainError(f"{path}: only undirected graphs are supported")
    key_ids = {
        k.get("id") for k in root.findall("g:key", ns)
        if k.get("attr.name") == "group" and k.get("for") in ("node", "all")
    }
    index, labels = {}, []
    for node in graph_el.findall("g:node", ns):
        index[node.get("id")] = len(index)
        label = None
        for d in node.findall("g:data", ns):
            if d.get("key") in key_ids:
                label = (d.text or "").strip()
        labels.append(label)
    edges = []
    for e in graph_el.findall("g:edge", ns):
        u, v = index[e.get("source")], index[e.get("target")]
        edges.append((u, v))
    g = Graph.from_edges(len(index), edges)
    if labels and all(lab in ("A", "B", "U") for lab in labels):
        return g, np.array([Group[lab] for lab in labels], dtype=np.int8)
    return g, None


def write_dot(g: Graph, path, states=None) -> None:
    labels = _labels(g, states)
    lines = ["graph G {"]
    for v in range(g.n):
        if labels is None:
            lines.append(f"  {v};")
        else:
            lab = labels[v]
            lines.append(f'  {v} [group="{lab}", color="{_DOT_COLORS[lab]}", style=filled];')
    for u, v in g.edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
