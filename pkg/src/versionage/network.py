"""Cache-network topology: validation, classification, and path extraction.

A network is a directed graph of caches fed from one source node.  The
classification gates which engines apply: PATH and TREE networks admit the
closed-form expected version age, while GENERAL graphs (a node with several
incoming links, or cycles among caches) are simulation-only.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .distributions import Distribution, from_literal
from .errors import (
    CycleThroughSource,
    DuplicateLink,
    DuplicatePriority,
    NotATree,
    SelfLoop,
    SourceHasIncoming,
    UnknownNode,
    UnreachableNode,
)

__all__ = ["Link", "NetworkClass", "CacheNetwork"]


class NetworkClass(enum.Enum):
    PATH = "path"
    TREE = "tree"
    GENERAL = "general"


@dataclass(frozen=True)
class Link:
    """A directed update link; ``priority`` breaks simultaneous arrivals."""

    src: str
    dst: str
    dist: Distribution
    priority: int


class CacheNetwork:
    """Immutable after construction; freely shared.

    Structural validation happens here, so every constructed network is
    well formed: all link endpoints declared, no self-loops or duplicate
    links, unique priorities per incoming set, nothing feeding back into the
    source, and every node reachable from the source.
    """

    def __init__(self, nodes, source: str, source_dist: Distribution, links):
        self.nodes: tuple[str, ...] = tuple(str(n) for n in nodes)
        self.source = str(source)
        self.source_dist = source_dist
        if len(set(self.nodes)) != len(self.nodes):
            raise UnknownNode("node ids must be unique")
        if self.source not in self.nodes:
            raise UnknownNode(f"source {self.source!r} is not a declared node")

        self.links: tuple[Link, ...] = self._resolve_links(links)
        self._incoming: dict[str, list[Link]] = {n: [] for n in self.nodes}
        self._outgoing: dict[str, list[Link]] = {n: [] for n in self.nodes}
        for link in self.links:
            self._incoming[link.dst].append(link)
            self._outgoing[link.src].append(link)

        self._check_source_isolation()
        self.depth = self._check_reachability()
        self.classification = self._classify()

    # -- construction helpers -------------------------------------------------

    def _resolve_links(self, links) -> tuple[Link, ...]:
        node_set = set(self.nodes)
        seen_pairs: set[tuple[str, str]] = set()
        per_dst_priorities: dict[str, set[int]] = {}
        per_dst_count: dict[str, int] = {}
        resolved: list[Link] = []
        for entry in links:
            if isinstance(entry, Link):
                src, dst, dist, priority = entry.src, entry.dst, entry.dist, entry.priority
            else:
                src, dst, dist = entry[0], entry[1], entry[2]
                priority = entry[3] if len(entry) > 3 else None
            src, dst = str(src), str(dst)
            if src not in node_set:
                raise UnknownNode(f"link {src!r}->{dst!r}: {src!r} is not a declared node")
            if dst not in node_set:
                raise UnknownNode(f"link {src!r}->{dst!r}: {dst!r} is not a declared node")
            if src == dst:
                raise SelfLoop(f"link {src!r}->{dst!r} is a self-loop")
            if (src, dst) in seen_pairs:
                raise DuplicateLink(f"link {src!r}->{dst!r} declared twice")
            seen_pairs.add((src, dst))
            if priority is None:
                # default: declaration order within the destination's incoming set
                priority = per_dst_count.get(dst, 0)
            priority = int(priority)
            used = per_dst_priorities.setdefault(dst, set())
            if priority in used:
                raise DuplicatePriority(
                    f"node {dst!r} has two incoming links with priority {priority}"
                )
            used.add(priority)
            per_dst_count[dst] = per_dst_count.get(dst, 0) + 1
            resolved.append(Link(src=src, dst=dst, dist=dist, priority=priority))
        return tuple(resolved)

    def _check_reachability(self) -> dict[str, int]:
        depth = {self.source: 0}
        queue = deque([self.source])
        while queue:
            node = queue.popleft()
            for link in self._outgoing[node]:
                if link.dst not in depth:
                    depth[link.dst] = depth[node] + 1
                    queue.append(link.dst)
        missing = [n for n in self.nodes if n not in depth]
        if missing:
            raise UnreachableNode(f"nodes unreachable from source: {missing}")
        return depth

    def _check_source_isolation(self) -> None:
        for link in self._incoming[self.source]:
            if self._reaches(self.source, link.src):
                raise CycleThroughSource(
                    f"link {link.src!r}->{link.dst!r} closes a cycle through the source"
                )
            raise SourceHasIncoming(f"source {self.source!r} has incoming link from {link.src!r}")

    def _reaches(self, start: str, goal: str) -> bool:
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                return True
            for link in self._outgoing[node]:
                if link.dst not in seen:
                    seen.add(link.dst)
                    queue.append(link.dst)
        return False

    def _classify(self) -> NetworkClass:
        if any(len(self._incoming[n]) != 1 for n in self.nodes if n != self.source):
            return NetworkClass.GENERAL
        if all(len(self._outgoing[n]) <= 1 for n in self.nodes):
            return NetworkClass.PATH
        return NetworkClass.TREE

    # -- queries ---------------------------------------------------------------

    def validate(self) -> NetworkClass:
        """Classification of this (already structurally validated) network."""
        return self.classification

    def incoming(self, node: str) -> tuple[Link, ...]:
        return tuple(self._incoming[node])

    def outgoing(self, node: str) -> tuple[Link, ...]:
        return tuple(self._outgoing[node])

    @property
    def is_tree(self) -> bool:
        return self.classification is not NetworkClass.GENERAL

    def parent_link(self, node: str) -> Link:
        if not self.is_tree:
            raise NotATree("parent links are only defined on PATH/TREE networks")
        return self._incoming[node][0]

    def path_to_source(self, node: str) -> list[Link]:
        """Links from the source down to ``node``, in hop order."""
        if node not in self._incoming:
            raise UnknownNode(f"{node!r} is not a declared node")
        if not self.is_tree:
            raise NotATree("paths to the source are only defined on PATH/TREE networks")
        path: list[Link] = []
        cur = node
        while cur != self.source:
            link = self._incoming[cur][0]
            path.append(link)
            cur = link.src
        path.reverse()
        return path

    def leaves(self) -> list[str]:
        """Nodes with no outgoing links, excluding the source."""
        return [n for n in self.nodes if n != self.source and not self._outgoing[n]]

    def topo_order(self) -> list[str]:
        """Non-source nodes ordered by increasing depth (parents first on trees)."""
        return sorted(
            (n for n in self.nodes if n != self.source),
            key=lambda n: (self.depth[n], self.nodes.index(n)),
        )

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        """Normalized topology dump; re-parses to an identical network."""
        return {
            "nodes": list(self.nodes),
            "source": self.source,
            "source_dist": self.source_dist.to_literal(),
            "links": [
                {
                    "from": link.src,
                    "to": link.dst,
                    "dist": link.dist.to_literal(),
                    "priority": link.priority,
                }
                for link in self.links
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CacheNetwork":
        links = [
            (e["from"], e["to"], from_literal(e["dist"]), e.get("priority"))
            for e in obj["links"]
        ]
        return cls(
            nodes=obj["nodes"],
            source=obj["source"],
            source_dist=from_literal(obj["source_dist"]),
            links=links,
        )

    def __repr__(self) -> str:
        return (
            f"CacheNetwork({len(self.nodes)} nodes, {len(self.links)} links, "
            f"{self.classification.value})"
        )
