"""Max-tree (component tree) of upper level sets and marker-based selection.

A node is a connected component of some level set ``X_v = {x : f(x) >= v}``
where ``v`` is the smallest value inside the component; its *proper* pixels
are those at exactly that level. Nodes are numbered so that every parent
precedes its children and the root is node 0.

The interactive segmentation picks the set of nodes whose union best fits a
user region ``G`` for the pseudo-distance

    d_alpha(X, G) = alpha |X \\ G| + (1 - alpha) |G \\ X|

solved exactly by dynamic programming over the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .lip import DEFAULT_SCALE, GreyScale
from .raster import GreyImage, RegionMask, _check_same_shape


def _neighbour_offsets(connectivity):
    if connectivity == 4:
        return ((-1, 0), (0, -1), (0, 1), (1, 0))
    if connectivity == 8:
        return ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


@dataclass(frozen=True, eq=False)
class MaxTree:
    shape: tuple[int, int]
    levels: np.ndarray  # per node
    parents: np.ndarray  # per node, -1 for the root
    node_of_pixel: np.ndarray  # flat pixel index -> node owning it as a proper pixel
    scale: GreyScale = DEFAULT_SCALE
    connectivity: int = 4

    root = 0

    def __len__(self):
        return len(self.levels)

    @cached_property
    def areas(self) -> np.ndarray:
        return self.subtree_sum(np.bincount(self.node_of_pixel, minlength=len(self)))

    @cached_property
    def children(self) -> list[list[int]]:
        kids = [[] for _ in range(len(self))]
        for n in range(1, len(self)):
            kids[self.parents[n]].append(n)
        return kids

    def subtree_sum(self, per_node) -> np.ndarray:
        """Accumulate a per-node quantity over each node's subtree."""
        acc = np.array(per_node, dtype=np.int64 if np.issubdtype(np.asarray(per_node).dtype, np.integer) else float)
        for n in range(len(self) - 1, 0, -1):
            acc[self.parents[n]] += acc[n]
        return acc

    def proper_pixels(self, node: int) -> np.ndarray:
        """Flat indices of the pixels at exactly this node's level."""
        return np.flatnonzero(self.node_of_pixel == node)

    def subtree_mask(self, nodes) -> RegionMask:
        """Pixels covered by the union of the given nodes (each with its subtree)."""
        covered = np.zeros(len(self), dtype=bool)
        covered[list(nodes)] = True
        for n in range(1, len(self)):
            covered[n] |= covered[self.parents[n]]
        return RegionMask(covered[self.node_of_pixel].reshape(self.shape))

    def pixels(self, node: int) -> RegionMask:
        return self.subtree_mask([node])


def build_max_tree(img, connectivity: int = 4) -> MaxTree:
    """Union-find max-tree of an integer-valued image.

    Pixels are processed by decreasing level (stable, raster order inside a
    level); each one becomes the root of its current component and absorbs
    the already-processed neighbouring components. A final canonicalisation
    pass points every pixel at the representative of its level component.
    """
    if isinstance(img, GreyImage):
        values, scale = img.pixels, img.scale
    else:
        values, scale = np.asarray(img, dtype=np.float64), DEFAULT_SCALE
    if values.ndim != 2:
        raise ValueError("max-tree needs a 2-D image")
    if not np.all(values == np.round(values)):
        raise ValueError("max-tree needs an integer-valued (quantized) image")
    h, w = values.shape
    f = values.astype(np.int64).ravel().tolist()
    n = h * w
    offsets = _neighbour_offsets(connectivity)

    order = sorted(range(n), key=lambda p: -f[p])
    parent = list(range(n))
    zpar = [-1] * n

    def find(p):
        root = p
        while zpar[root] != root:
            root = zpar[root]
        while zpar[p] != root:
            zpar[p], p = root, zpar[p]
        return root

    for p in order:
        zpar[p] = p
        y, x = divmod(p, w)
        for dy, dx in offsets:
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w:
                q = yy * w + xx
                if zpar[q] != -1:
                    r = find(q)
                    if r != p:
                        parent[r] = p
                        zpar[r] = p

    for p in reversed(order):
        q = parent[p]
        if f[parent[q]] == f[q]:
            parent[p] = parent[q]

    # number canonical pixels root-first, i.e. by increasing level
    node_id = {}
    for p in reversed(order):
        if parent[p] == p or f[parent[p]] != f[p]:
            node_id[p] = len(node_id)
    levels = np.empty(len(node_id), dtype=np.int64)
    parents = np.full(len(node_id), -1, dtype=np.int64)
    for p, k in node_id.items():
        levels[k] = f[p]
        if parent[p] != p:
            parents[k] = node_id[parent[p]]
    node_of_pixel = np.array([node_id[p] if p in node_id else node_id[parent[p]] for p in range(n)], dtype=np.int64)
    return MaxTree((h, w), levels, parents, node_of_pixel, scale, connectivity)


def reconstruct(tree: MaxTree) -> GreyImage:
    """Image whose proper pixels carry their node level; inverts the build."""
    return GreyImage(tree.levels[tree.node_of_pixel].reshape(tree.shape).astype(np.float64), tree.scale)


def d_alpha(x_mask: RegionMask, g_mask: RegionMask, alpha: float) -> float:
    """``alpha |X \\ G| + (1 - alpha) |G \\ X|``; alpha=1 counts false positives, 0 false negatives."""
    _check_same_shape(x_mask, g_mask)
    _check_alpha(alpha)
    fp = int(np.count_nonzero(x_mask.bits & ~g_mask.bits))
    fn = int(np.count_nonzero(g_mask.bits & ~x_mask.bits))
    return alpha * fp + (1.0 - alpha) * fn


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


class CtSegmentation(NamedTuple):
    mask: RegionMask
    nodes: tuple[int, ...]
    cost: float


def segment_ct(tree: MaxTree, g_mask: RegionMask, alpha: float) -> CtSegmentation:
    """Exact minimiser of ``d_alpha(union of nodes, G)`` over all node subsets.

    A union of nodes is a union of whole subtrees, so every node is either
    covered (all its proper pixels in, paying ``alpha`` per pixel outside G)
    or not (paying ``1 - alpha`` per G pixel among its proper pixels). For
    each node the DP compares covering its whole subtree with leaving it out
    and recursing into the children. Ties on cost go to the smaller
    symmetric difference, then to not taking the node, so that e.g. a G
    equal to one node selects exactly that node for every alpha.
    """
    if tuple(g_mask.shape) != tuple(tree.shape):
        raise ValueError(f"marker shape {g_mask.shape} does not match tree shape {tree.shape}")
    _check_alpha(alpha)
    g = g_mask.bits.ravel()
    g_proper = np.bincount(tree.node_of_pixel[g], minlength=len(tree))
    g_sub = tree.subtree_sum(g_proper)
    fp_sub = tree.areas - g_sub

    best = [None] * len(tree)
    take = np.zeros(len(tree), dtype=bool)
    for n in range(len(tree) - 1, -1, -1):
        keep = (alpha * fp_sub[n], int(fp_sub[n]))
        cost, diff = (1.0 - alpha) * g_proper[n], int(g_proper[n])
        for c in tree.children[n]:
            cost += best[c][0]
            diff += best[c][1]
        skip = (cost, diff)
        take[n] = keep < skip
        best[n] = keep if take[n] else skip

    selected = []
    stack = [tree.root]
    while stack:
        n = stack.pop()
        if take[n]:
            selected.append(n)
        else:
            stack.extend(tree.children[n])
    selected.sort()
    mask = tree.subtree_mask(selected)
    return CtSegmentation(mask, tuple(selected), d_alpha(mask, g_mask, alpha))


def dump_tree(tree: MaxTree) -> str:
    """Debug listing, one node per line: id, parent, level, area, proper count."""
    proper = np.bincount(tree.node_of_pixel, minlength=len(tree))
    lines = ["# id parent level area proper"]
    for n in range(len(tree)):
        lines.append(f"{n} {tree.parents[n]} {tree.levels[n]} {tree.areas[n]} {proper[n]}")
    return "\n".join(lines) + "\n"
