import hashlib
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from relaypay.merkle import MerkleMultiProof, merkle_member, merkle_root, merkle_verify


def reference_tree(leaves):
    """Every level of the tree, recomputed from scratch with hashlib."""
    level = [hashlib.sha256(b"\x00" + x).digest() for x in leaves]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
        level = [hashlib.sha256(b"\x01" + level[i] + level[i + 1]).digest() for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


LEAVES8 = [bytes([i]) * 8 for i in range(8)]


def test_single_leaf():
    root = merkle_root([b"only"])
    assert root == hashlib.sha256(b"\x00only").digest()
    selected, proof = merkle_member([0], [b"only"])
    assert proof.siblings == ()
    assert merkle_verify(selected, proof, root)


def test_root_matches_reference():
    for n in range(1, 12):
        leaves = [bytes([i]) for i in range(n)]
        assert merkle_root(leaves) == reference_tree(leaves)[-1][0]


def test_full_membership():
    selected, proof = merkle_member(range(8), LEAVES8)
    assert proof.siblings == ()
    assert merkle_verify(selected, proof, merkle_root(LEAVES8))


def test_pair_1_3_of_8():
    levels = reference_tree(LEAVES8)
    selected, proof = merkle_member([1, 3], LEAVES8)
    # leaves 1 and 3 need leaf siblings 0 and 2, then the right half's root
    assert proof.siblings == (levels[0][0], levels[0][2], levels[2][1])
    assert merkle_verify(selected, proof, levels[-1][0])
    assert not merkle_verify(selected[::-1], proof, levels[-1][0])


def test_odd_width_duplicates_last():
    leaves = [b"a", b"b", b"c"]
    levels = reference_tree(leaves)
    selected, proof = merkle_member([2], leaves)
    assert proof.siblings == (levels[1][0],)
    assert merkle_verify(selected, proof, levels[-1][0])


def test_every_subset_of_small_trees():
    for n in range(1, 7):
        leaves = [bytes([65 + i]) for i in range(n)]
        root = merkle_root(leaves)
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                selected, proof = merkle_member(subset, leaves)
                assert merkle_verify(selected, proof, root)


def test_altered_index_fails():
    selected, proof = merkle_member([1, 3], LEAVES8)
    bad = MerkleMultiProof((1, 4), proof.siblings, proof.width)
    assert not merkle_verify(selected, bad, merkle_root(LEAVES8))


def test_extra_or_missing_sibling_fails():
    root = merkle_root(LEAVES8)
    selected, proof = merkle_member([1, 3], LEAVES8)
    assert not merkle_verify(selected, MerkleMultiProof(proof.indices, proof.siblings[:-1], 8), root)
    assert not merkle_verify(selected, MerkleMultiProof(proof.indices, proof.siblings + (b"x" * 32,), 8), root)


def test_empty_rejected():
    with pytest.raises(ValueError):
        merkle_root([])
    with pytest.raises(ValueError):
        merkle_member([0], [])
    with pytest.raises(ValueError):
        merkle_member([3], [b"a"])


@given(
    st.lists(st.binary(min_size=1, max_size=8), min_size=1, max_size=20),
    st.data(),
)
def test_membership_property(leaves, data):
    subset = data.draw(st.sets(st.integers(0, len(leaves) - 1), min_size=1))
    selected, proof = merkle_member(subset, leaves)
    root = merkle_root(leaves)
    assert merkle_verify(selected, proof, root)
    pos = data.draw(st.integers(0, len(selected) - 1))
    mutated = list(selected)
    mutated[pos] = mutated[pos] + b"\x00"
    assert not merkle_verify(mutated, proof, root)
    if proof.siblings:
        j = data.draw(st.integers(0, len(proof.siblings) - 1))
        sibs = list(proof.siblings)
        sibs[j] = bytes(32) if sibs[j] != bytes(32) else b"\x01" * 32
        assert not merkle_verify(selected, MerkleMultiProof(proof.indices, tuple(sibs), proof.width), root)
