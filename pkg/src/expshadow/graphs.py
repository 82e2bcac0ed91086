"""Node-labelled directed graphs and bi-essential trimming."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ParseError


def trim_bi_essential(succ: Mapping) -> dict:
    """Drop nodes without in- or out-edges until none remain.

    ``succ`` maps each node to its successors. The result keeps exactly the
    nodes lying on some bi-infinite walk, with edges restricted to them, so
    every finite path of the result extends to a bi-infinite walk.
    """
    nodes = set(succ)
    out_deg = {v: 0 for v in nodes}
    pred = {v: [] for v in nodes}
    for v, ws in succ.items():
        for w in ws:
            if w in nodes:
                out_deg[v] += 1
                pred[w].append(v)
    in_deg = {v: len(pred[v]) for v in nodes}
    dead = set()
    queue = deque(v for v in nodes if in_deg[v] == 0 or out_deg[v] == 0)
    while queue:
        v = queue.popleft()
        if v in dead:
            continue
        dead.add(v)
        for w in succ[v]:
            if w in nodes and w not in dead:
                in_deg[w] -= 1
                if in_deg[w] == 0:
                    queue.append(w)
        for u in pred[v]:
            if u not in dead:
                out_deg[u] -= 1
                if out_deg[u] == 0:
                    queue.append(u)
    alive = nodes - dead
    return {v: [w for w in succ[v] if w in alive] for v in succ if v in alive}


@dataclass(frozen=True)
class LabeledGraph:
    """Directed graph whose nodes carry point labels; walks spell point sequences."""

    labels: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.succ) != len(self.labels):
            raise ParseError("graph needs one successor list per node")
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(len(self.labels))))

    @property
    def size(self) -> int:
        return len(self.labels)

    def edges(self):
        for v, ws in enumerate(self.succ):
            for w in ws:
                yield v, w

    def has_edge(self, v: int, w: int) -> bool:
        return w in self.succ[v]

    def to_json(self, points: Sequence[str]) -> dict:
        return {"nodes": list(self.names), "labels": [points[x] for x in self.labels],
                "edges": [[v, w] for v, w in self.edges()]}


def load_restriction(data, sys) -> LabeledGraph:
    try:
        names, labels, edges = data["nodes"], data["labels"], data["edges"]
    except (KeyError, TypeError):
        raise ParseError("restriction graph needs 'nodes', 'labels' and 'edges'") from None
    if len(names) != len(labels):
        raise ParseError("restriction graph: one label per node")
    succ = [[] for _ in names]
    for e in edges:
        v, w = e
        if not (0 <= v < len(names) and 0 <= w < len(names)):
            raise ParseError(f"restriction edge {e} out of range")
        if w not in succ[v]:
            succ[v].append(w)
    return LabeledGraph(tuple(sys.index(p) for p in labels), tuple(tuple(s) for s in succ),
                        tuple(str(n) for n in names))
