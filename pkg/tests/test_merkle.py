import hashlib

import pytest
from hypothesis import given, settings, strategies as st

from oracles import merkle_root
from zkprovd.backend.merkle import MerklePath, MerkleTree, depth_for, hash_leaf, hash_node, merkle_commit, merkle_verify_path
from zkprovd.errors import ParameterError


def leaf(v):
    return v.to_bytes(32, "little")


# Frozen with coreutils sha256sum over the prefixed byte strings (leaves are 1, 2, 3).
ROOT_1 = "1b7c643b049c11a4fb6b65822e4a5e2a3da54223366c5f453cf376536f9bf42a"
ROOT_12 = "a0a7706d19dcf90768b87e1330219f25591e960997e8ac753f1fa7a992d061c4"
ROOT_123 = "b5343a3cbab3aea69b2f56e7c3150f6aaec6f4e35705416319654f7f4098578c"


def test_single_leaf():
    root, tree = merkle_commit([leaf(1)])
    assert root.hex() == ROOT_1 == hashlib.sha256(b"\x00" + leaf(1)).hexdigest()
    assert tree.depth == 0
    assert merkle_verify_path(root, leaf(1), tree.open(0))


def test_two_leaves():
    root, _ = merkle_commit([leaf(1), leaf(2)])
    assert root.hex() == ROOT_12


def test_three_leaves_pad_with_zero():
    root3, _ = merkle_commit([leaf(1), leaf(2), leaf(3)])
    root4, _ = merkle_commit([leaf(1), leaf(2), leaf(3), bytes(32)])
    assert root3 == root4
    assert root3.hex() == ROOT_123


def test_empty_rejected():
    with pytest.raises(ParameterError):
        merkle_commit([])
    with pytest.raises(ParameterError):
        merkle_commit([b"short"])


def test_domain_separation():
    l0, l1 = leaf(5), leaf(6)
    assert hash_leaf(l0 + l1[:0]) != hash_node(l0, l1)
    assert hash_leaf(l0) == hashlib.sha256(b"\x00" + l0).digest()


def test_two_leaf_path_by_hand():
    root, tree = merkle_commit([leaf(1), leaf(2)])
    p0 = tree.open(0)
    assert p0 == MerklePath(0, (hash_leaf(leaf(2)),))
    assert merkle_verify_path(root, leaf(1), p0)
    # the same sibling with index 1 folds as H(sib || h) which is a different node
    assert not merkle_verify_path(root, leaf(1), MerklePath(1, p0.siblings))
    assert not merkle_verify_path(root, leaf(1), MerklePath(2, p0.siblings))
    assert not merkle_verify_path(root, leaf(1), MerklePath(-1, p0.siblings))


def test_flipped_sibling_byte():
    leaves = [leaf(v) for v in range(1, 6)]
    root, tree = merkle_commit(leaves)
    for i in range(len(leaves)):
        path = tree.open(i)
        for s in range(len(path.siblings)):
            for b in range(32):
                sibs = list(path.siblings)
                sib = bytearray(sibs[s])
                sib[b] ^= 0x01
                sibs[s] = bytes(sib)
                assert not merkle_verify_path(root, leaves[i], MerklePath(i, tuple(sibs)))


def test_malformed_paths():
    root, tree = merkle_commit([leaf(1), leaf(2), leaf(3)])
    path = tree.open(2)
    assert not merkle_verify_path(root, leaf(3), MerklePath(2, path.siblings[:1]))
    assert not merkle_verify_path(root, leaf(3), MerklePath(2, path.siblings + (bytes(32),)))
    assert not merkle_verify_path(root, leaf(3)[:31], path)
    assert not merkle_verify_path(root, leaf(3), MerklePath(2, (b"x",) + path.siblings[1:]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2**256 - 1), min_size=1, max_size=33))
def test_matches_oracle_and_paths_roundtrip(values):
    leaves = [leaf(v) for v in values]
    root, tree = merkle_commit(leaves)
    assert root == merkle_root(leaves)
    assert tree.depth == depth_for(len(leaves))
    for i, lf in enumerate(leaves):
        assert merkle_verify_path(root, lf, tree.open(i))
        other = leaf((values[i] + 1) % 2**256)
        assert not merkle_verify_path(root, other, tree.open(i))


def test_tree_levels_shape():
    t = MerkleTree([leaf(v) for v in range(5)])
    assert [len(level) for level in t.levels] == [8, 4, 2, 1]
