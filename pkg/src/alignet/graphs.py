"""Two aligned directed networks: data model, ingestion, splits, sampling.

A pair of directed graphs is joined by bidirectional anchor links mapping
nodes of one network onto nodes of the other (at most one anchor per node).
Link prediction experiments need the positive link sets of both networks plus
the anchor set, matched negative samples, and a train/test partition of all
six lists; that bookkeeping lives in :class:`LinkSplit`.

All objects are immutable after construction (arrays are marked read-only)
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, SamplingError, ValidationError

__all__ = [
    "DirectedGraph",
    "AlignedPair",
    "PartitionedPairs",
    "LinkSplit",
    "load_aligned_pair",
    "make_split",
    "message_graph",
    "save_split",
    "load_split",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _canonical_edges(edges) -> np.ndarray:
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"edge array must be (m, 2), got {arr.shape}")
    # dedupe and fix a deterministic order
    arr = np.unique(arr, axis=0)
    return arr


class DirectedGraph:
    """Directed graph over dense integer node ids 0..node_count-1.

    Stores the edge list plus both adjacency views: ``out_adj[i]`` holds the
    successors of i (nodes i follows) and ``in_adj[i]`` its predecessors
    (nodes following i).  Self-loops and duplicate edges are rejected.
    """

    def __init__(self, node_count: int, edges) -> None:
        edges = _canonical_edges(edges)
        if node_count < 0:
            raise ValidationError(f"node_count must be non-negative, got {node_count}")
        if edges.size:
            if edges.min() < 0 or edges.max() >= node_count:
                raise ValidationError(
                    f"edge endpoint out of range [0, {node_count}): "
                    f"min={edges.min()}, max={edges.max()}"
                )
            loops = edges[:, 0] == edges[:, 1]
            if loops.any():
                i = int(edges[loops][0, 0])
                raise ValidationError(f"self-loop on node {i} is not allowed")
        self.node_count = int(node_count)
        self.edges = _freeze(edges)
        self.out_adj = tuple(
            _freeze(np.sort(edges[edges[:, 0] == i, 1])) for i in range(node_count)
        )
        self.in_adj = tuple(
            _freeze(np.sort(edges[edges[:, 1] == i, 0])) for i in range(node_count)
        )
        self._edge_set = frozenset(map(tuple, edges.tolist()))

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._edge_set

    def out_neighbors(self, i: int) -> np.ndarray:
        return self.out_adj[i]

    def in_neighbors(self, i: int) -> np.ndarray:
        return self.in_adj[i]

    def __repr__(self) -> str:
        return f"DirectedGraph(nodes={self.node_count}, edges={self.edge_count})"


class AlignedPair:
    """Two directed graphs plus bidirectional one-to-one anchor links.

    ``anchors`` is an (a, 2) array of (node-in-g1, node-in-g2) pairs.  Each
    node participates in at most one anchor, so the anchor relation is a
    partial bijection between the two node sets.
    """

    def __init__(self, g1: DirectedGraph, g2: DirectedGraph, anchors) -> None:
        arr = np.asarray(list(anchors) if not isinstance(anchors, np.ndarray) else anchors,
                         dtype=np.int64).reshape(-1, 2)
        arr = np.unique(arr, axis=0)
        if arr.size:
            if arr[:, 0].min() < 0 or arr[:, 0].max() >= g1.node_count:
                raise ValidationError("anchor endpoint out of range in first network")
            if arr[:, 1].min() < 0 or arr[:, 1].max() >= g2.node_count:
                raise ValidationError("anchor endpoint out of range in second network")
            for col, label in ((0, "first"), (1, "second")):
                ids, counts = np.unique(arr[:, col], return_counts=True)
                if (counts > 1).any():
                    dup = int(ids[counts > 1][0])
                    raise ValidationError(
                        f"node {dup} in the {label} network is aligned more than once"
                    )
        self.g1 = g1
        self.g2 = g2
        self.anchors = _freeze(arr)
        # partner lookup per network, -1 = unanchored
        p1 = np.full(g1.node_count, -1, dtype=np.int64)
        p2 = np.full(g2.node_count, -1, dtype=np.int64)
        if arr.size:
            p1[arr[:, 0]] = arr[:, 1]
            p2[arr[:, 1]] = arr[:, 0]
        self.partner1 = _freeze(p1)
        self.partner2 = _freeze(p2)

    @property
    def anchor_count(self) -> int:
        return self.anchors.shape[0]

    def graph(self, net: int) -> DirectedGraph:
        return self.g1 if net == 0 else self.g2

    def partners(self, net: int, node: int) -> np.ndarray:
        """Anchor partners of ``node`` in the other network (0 or 1 entries)."""
        p = (self.partner1 if net == 0 else self.partner2)[node]
        return np.array([p], dtype=np.int64) if p >= 0 else np.empty(0, dtype=np.int64)

    def __repr__(self) -> str:
        return f"AlignedPair(g1={self.g1!r}, g2={self.g2!r}, anchors={self.anchor_count})"


# ---------------------------------------------------------------------------
# file ingestion

def _read_pairs(path: str, what: str) -> list[tuple[int, int]]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t") if "\t" in line else line.split()
            if len(fields) != 2:
                raise FormatError(f"{path}:{lineno}: expected two {what} columns, got {line!r}")
            try:
                a, b = int(fields[0]), int(fields[1])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer id in {line!r}") from None
            if a < 0 or b < 0:
                raise FormatError(f"{path}:{lineno}: negative id in {line!r}")
            pairs.append((a, b))
    return pairs


def load_aligned_pair(g1_edges: str, g2_edges: str, anchor_file: str) -> AlignedPair:
    """Read two TSV edge lists and a TSV anchor list into an AlignedPair.

    Node counts are inferred as 1 + the largest id seen for each network
    (anchor endpoints included).  Duplicate edges are collapsed; self-loops
    and doubly-aligned nodes raise :class:`ValidationError`.
    """
    e1 = _read_pairs(g1_edges, "edge")
    e2 = _read_pairs(g2_edges, "edge")
    anchors = _read_pairs(anchor_file, "anchor")
    n1 = 1 + max([max(a, b) for a, b in e1] + [a for a, _ in anchors], default=-1)
    n2 = 1 + max([max(a, b) for a, b in e2] + [b for _, b in anchors], default=-1)
    return AlignedPair(DirectedGraph(n1, e1), DirectedGraph(n2, e2), anchors)


# ---------------------------------------------------------------------------
# train/test splits with negative sampling

@dataclass(frozen=True)
class PartitionedPairs:
    """One link list split into train and test node-pair arrays."""

    train: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "train", _freeze(np.asarray(self.train, dtype=np.int64).reshape(-1, 2)))
        object.__setattr__(self, "test", _freeze(np.asarray(self.test, dtype=np.int64).reshape(-1, 2)))

    @property
    def all(self) -> np.ndarray:
        return np.concatenate([self.train, self.test], axis=0)

    def __len__(self) -> int:
        return self.train.shape[0] + self.test.shape[0]


@dataclass(frozen=True)
class LinkSplit:
    """Positive/negative social and anchor links partitioned for training.

    Negative social pairs are directed non-edges of their own network with
    distinct endpoints; negative anchors are cross-network pairs absent from
    the anchor set.  Sizes follow the experiment protocol: two negatives per
    positive social link, five per positive anchor.
    """

    lam: float
    seed: int
    pos_soc1: PartitionedPairs
    neg_soc1: PartitionedPairs
    pos_soc2: PartitionedPairs
    neg_soc2: PartitionedPairs
    pos_anchor: PartitionedPairs
    neg_anchor: PartitionedPairs

    def lists(self) -> dict[str, PartitionedPairs]:
        return {
            "pos_soc1": self.pos_soc1,
            "neg_soc1": self.neg_soc1,
            "pos_soc2": self.pos_soc2,
            "neg_soc2": self.neg_soc2,
            "pos_anchor": self.pos_anchor,
            "neg_anchor": self.neg_anchor,
        }


def _partition(pairs: np.ndarray, lam: float, rng: np.random.Generator) -> PartitionedPairs:
    m = pairs.shape[0]
    n_train = int(np.floor(lam * m + 0.5))
    perm = rng.permutation(m)
    return PartitionedPairs(pairs[perm[:n_train]], pairs[perm[n_train:]])


def _sample_negative_pairs(
    rng: np.random.Generator,
    n_src: int,
    n_dst: int,
    forbidden: frozenset,
    need: int,
    exclude_diagonal: bool,
) -> np.ndarray:
    """Draw ``need`` distinct pairs outside ``forbidden`` (and off-diagonal)."""
    universe = n_src * n_dst - (n_src if exclude_diagonal else 0) - len(forbidden)
    if universe < need:
        raise SamplingError(
            f"need {need} negative pairs but only {universe} unknown pairs exist"
        )
    chosen: set[tuple[int, int]] = set()
    out = np.empty((need, 2), dtype=np.int64)
    got = 0
    # rejection sampling; fall back to full enumeration if the space is tight
    max_tries = 40 * need + 200
    tries = 0
    while got < need and tries < max_tries:
        k = max(64, need - got)
        src = rng.integers(0, n_src, size=k)
        dst = rng.integers(0, n_dst, size=k)
        tries += k
        for s, d in zip(src.tolist(), dst.tolist()):
            if got >= need:
                break
            if exclude_diagonal and s == d:
                continue
            p = (s, d)
            if p in forbidden or p in chosen:
                continue
            chosen.add(p)
            out[got, 0], out[got, 1] = s, d
            got += 1
    if got < need:
        # dense graph: enumerate the whole complement deterministically
        all_pairs = [
            (s, d)
            for s in range(n_src)
            for d in range(n_dst)
            if not (exclude_diagonal and s == d) and (s, d) not in forbidden
        ]
        idx = rng.choice(len(all_pairs), size=need, replace=False)
        out = np.array([all_pairs[i] for i in idx], dtype=np.int64)
    return out


def make_split(pair: AlignedPair, lam: float, seed: int) -> LinkSplit:
    """Sample negatives and partition every link list at training ratio ``lam``.

    Deterministic given ``seed``.  Negative sets are drawn once and reused by
    both the loss and the evaluation, with |neg_social| = 2 |pos_social| per
    network and |neg_anchor| = 5 |pos_anchor|.
    """
    if not (0.0 < lam < 1.0):
        raise ValidationError(f"training ratio must lie in (0, 1), got {lam}")
    rng = np.random.default_rng(seed)
    parts = {}
    for name, g in (("soc1", pair.g1), ("soc2", pair.g2)):
        pos = np.asarray(g.edges)
        neg = _sample_negative_pairs(
            rng, g.node_count, g.node_count, g._edge_set, 2 * pos.shape[0], True
        )
        parts[f"pos_{name}"] = _partition(pos, lam, rng)
        parts[f"neg_{name}"] = _partition(neg, lam, rng)
    pos_a = np.asarray(pair.anchors)
    anchor_set = frozenset(map(tuple, pos_a.tolist()))
    neg_a = _sample_negative_pairs(
        rng, pair.g1.node_count, pair.g2.node_count, anchor_set, 5 * pos_a.shape[0], False
    )
    parts["pos_anchor"] = _partition(pos_a, lam, rng)
    parts["neg_anchor"] = _partition(neg_a, lam, rng)
    return LinkSplit(lam=float(lam), seed=int(seed), **parts)


def resample_negatives(
    pair: AlignedPair, split: LinkSplit, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fresh loss-side negative draws with the same train-partition sizes.

    The evaluation negatives in ``split`` stay fixed; this only feeds the
    optional per-epoch resampling of the training loss.
    """
    neg1 = _sample_negative_pairs(
        rng, pair.g1.node_count, pair.g1.node_count, pair.g1._edge_set,
        split.neg_soc1.train.shape[0], True,
    )
    neg2 = _sample_negative_pairs(
        rng, pair.g2.node_count, pair.g2.node_count, pair.g2._edge_set,
        split.neg_soc2.train.shape[0], True,
    )
    anchor_set = frozenset(map(tuple, np.asarray(pair.anchors).tolist()))
    nega = _sample_negative_pairs(
        rng, pair.g1.node_count, pair.g2.node_count, anchor_set,
        split.neg_anchor.train.shape[0], False,
    )
    return neg1, neg2, nega


def message_graph(pair: AlignedPair, split: LinkSplit) -> AlignedPair:
    """Restrict the pair to train-partition positive links only.

    Test links must never shape the neighborhoods that attention aggregates
    over, so the forward pass always runs on this reduced pair.
    """
    g1 = DirectedGraph(pair.g1.node_count, split.pos_soc1.train)
    g2 = DirectedGraph(pair.g2.node_count, split.pos_soc2.train)
    return AlignedPair(g1, g2, split.pos_anchor.train)


# ---------------------------------------------------------------------------
# split persistence (one structured text file so runs are reproducible)

_SPLIT_MAGIC = "#%alignet-split v1"


def save_split(split: LinkSplit, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_SPLIT_MAGIC + "\n")
        fh.write(f"#seed\t{split.seed}\n")
        fh.write(f"#lambda\t{split.lam!r}\n")
        for name, part in split.lists().items():
            for sub in ("train", "test"):
                fh.write(f"#section\t{name}\t{sub}\n")
                for a, b in getattr(part, sub).tolist():
                    fh.write(f"{a}\t{b}\n")


def load_split(path: str) -> LinkSplit:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _SPLIT_MAGIC:
            raise FormatError(f"{path}:1: not a split file (bad magic {header!r})")
        seed = None
        lam = None
        sections: dict[tuple[str, str], list[tuple[int, int]]] = {}
        current: list[tuple[int, int]] | None = None
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#seed"):
                seed = int(line.split("\t")[1])
            elif line.startswith("#lambda"):
                lam = float(line.split("\t")[1])
            elif line.startswith("#section"):
                _, name, sub = line.split("\t")
                current = sections.setdefault((name, sub), [])
            elif line.startswith("#"):
                continue
            else:
                if current is None:
                    raise FormatError(f"{path}:{lineno}: link row outside any section")
                a, b = line.split("\t")
                current.append((int(a), int(b)))
        if seed is None or lam is None:
            raise FormatError(f"{path}: missing seed or lambda header")
        parts = {}
        for name in ("pos_soc1", "neg_soc1", "pos_soc2", "neg_soc2", "pos_anchor", "neg_anchor"):
            parts[name] = PartitionedPairs(
                np.array(sections.get((name, "train"), []), dtype=np.int64).reshape(-1, 2),
                np.array(sections.get((name, "test"), []), dtype=np.int64).reshape(-1, 2),
            )
        return LinkSplit(lam=lam, seed=seed, **parts)
