"""Binary SHA-256 Merkle tree with leaf/node domain separation.

leaf hash     = SHA-256(0x00 || leaf)
interior hash = SHA-256(0x01 || left || right)

Leaves are padded with all-zero 32-byte leaves to the next power of two.
"""

from __future__ import annotations

from dataclasses import dataclass
from hashlib import sha256

from ..errors import ParameterError

ZERO_LEAF = bytes(32)


def hash_leaf(leaf: bytes) -> bytes:
    return sha256(b"\x00" + leaf).digest()


def hash_node(left: bytes, right: bytes) -> bytes:
    return sha256(b"\x01" + left + right).digest()


def padded_size(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def depth_for(n: int) -> int:
    return padded_size(n).bit_length() - 1


@dataclass(frozen=True)
class MerklePath:
    leaf_index: int
    siblings: tuple[bytes, ...]


class MerkleTree:
    """All levels kept in memory; ``levels[0]`` are hashed leaves, ``levels[-1] == [root]``."""

    def __init__(self, leaves: list[bytes]):
        if not leaves:
            raise ParameterError("cannot commit to an empty leaf list")
        for leaf in leaves:
            if len(leaf) != 32:
                raise ParameterError("leaves must be 32 bytes")
        self.num_leaves = len(leaves)
        size = padded_size(len(leaves))
        level = [hash_leaf(leaf) for leaf in leaves]
        if size > len(level):
            level.extend([hash_leaf(ZERO_LEAF)] * (size - len(level)))
        self.levels = [level]
        while len(level) > 1:
            level = [hash_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
            self.levels.append(level)

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def open(self, index: int) -> MerklePath:
        if not 0 <= index < len(self.levels[0]):
            raise ParameterError(f"leaf index {index} out of range")
        siblings = []
        i = index
        for level in self.levels[:-1]:
            siblings.append(level[i ^ 1])
            i >>= 1
        return MerklePath(index, tuple(siblings))


def merkle_commit(leaves: list[bytes]) -> tuple[bytes, MerkleTree]:
    tree = MerkleTree(leaves)
    return tree.root, tree


def merkle_verify_path(root: bytes, leaf: bytes, path: MerklePath) -> bool:
    idx = path.leaf_index
    if not isinstance(idx, int) or idx < 0 or idx >> len(path.siblings):
        return False
    if len(leaf) != 32 or any(len(s) != 32 for s in path.siblings):
        return False
    h = hash_leaf(leaf)
    for sib in path.siblings:
        h = hash_node(sib, h) if idx & 1 else hash_node(h, sib)
        idx >>= 1
    return h == root
