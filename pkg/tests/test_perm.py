import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stopsmith.errors import DuplicateEntries, InvalidPermutation
from stopsmith.perm import (
    LehmerCode,
    Permutation,
    RankDirection,
    all_permutations,
    complement,
    decode_batch,
    inverse,
    inversion_count,
    inversion_counts,
    lehmer_decode,
    lehmer_encode,
    record_indicators,
    reduce_sequence,
    reverse,
)

P = Permutation.parse


def brute_inversions(vals):
    return sum(1 for i, j in itertools.combinations(range(len(vals)), 2) if vals[j] < vals[i])


@st.composite
def perms(draw, max_n=40):
    n = draw(st.integers(1, max_n))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


class TestParsing:
    def test_formats_agree(self):
        assert P("3 1 4 2") == P("3,1,4,2") == P("3142") == Permutation((3, 1, 4, 2))

    def test_str_is_space_separated(self):
        assert str(P("3142")) == "3 1 4 2"

    @pytest.mark.parametrize("bad", [(), (1, 1), (0, 1), (2, 3), (1, 2, 4)])
    def test_rejects_non_permutations(self, bad):
        with pytest.raises(InvalidPermutation):
            Permutation(bad)

    def test_rejects_garbage_text(self):
        with pytest.raises(InvalidPermutation):
            P("a b")

    def test_direction_parse(self):
        assert RankDirection.parse("MIN") is RankDirection.MIN
        assert RankDirection.parse(RankDirection.MAX) is RankDirection.MAX
        with pytest.raises(InvalidPermutation):
            RankDirection.parse("sideways")


class TestExamples:
    def test_inverse(self):
        assert inverse(Permutation.identity(4)) == Permutation.identity(4)
        assert inverse(P("3142")) == P("2413")
        assert inverse(P("21")) == P("21")

    def test_complement(self):
        assert complement(P("123")) == P("321")
        assert complement(P("3142")) == P("2413")
        assert complement(Permutation.identity(1)) == Permutation.identity(1)

    def test_reverse(self):
        assert reverse(P("3142")) == P("2413")

    def test_inversion_count(self):
        assert inversion_count(Permutation.identity(6)) == 0
        assert inversion_count(P("321")) == 3
        assert inversion_count(P("3142")) == 3

    def test_reduce_sequence(self):
        assert reduce_sequence((2.5, 0.3, 7.1)) == P("213")
        assert reduce_sequence([0.1, 0.2, 0.9, 1.5]) == Permutation.identity(4)
        assert reduce_sequence((5, 4, 3, 2, 1)) == P("54321")

    def test_reduce_sequence_ties(self):
        with pytest.raises(DuplicateEntries):
            reduce_sequence((1.0, 2.0, 1.0))

    def test_lehmer_decode(self):
        assert lehmer_decode(LehmerCode(3, (1, 0))) == P("213")
        assert lehmer_decode(LehmerCode(5, (0,) * 4)) == Permutation.identity(5)
        assert lehmer_decode(LehmerCode(5, (1, 2, 3, 4))) == P("54321")

    def test_lehmer_encode(self):
        assert lehmer_encode(Permutation.identity(4)).x == (0, 0, 0)
        assert lehmer_encode(P("213")).x == (1, 0)
        assert lehmer_encode(P("321")).x == (1, 2)

    @pytest.mark.parametrize("x", [(2,), (0, 3), (-1,)])
    def test_lehmer_code_range(self, x):
        with pytest.raises(InvalidPermutation):
            LehmerCode(len(x) + 1, x)

    def test_records(self):
        assert record_indicators(P("3142"), "min") == (True, True, False, False)
        assert record_indicators(P("3142"), "max") == (True, False, True, False)
        assert record_indicators(Permutation.identity(5), "min") == (True, False, False, False, False)


@pytest.mark.parametrize("n", range(1, 8))
def test_exhaustive_invariants(n):
    rows = all_permutations(n)
    counts = inversion_counts(rows)
    seen = set()
    for row, c in zip(rows.tolist(), counts.tolist()):
        p = Permutation(tuple(row))
        code = lehmer_encode(p)
        assert lehmer_decode(code) == p
        assert code.total() == inversion_count(p) == c
        assert inverse(inverse(p)) == p
        assert complement(complement(p)) == p
        assert inversion_count(inverse(p)) == c
        assert inversion_count(complement(p)) == n * (n - 1) // 2 - c
        assert record_indicators(p, "max") == record_indicators(complement(p), "min")
        seen.add(code.x)
    assert len(seen) == len(rows)


@given(perms())
def test_roundtrip_property(p):
    assert lehmer_decode(lehmer_encode(p)) == p
    assert inversion_count(p) == brute_inversions(p.values)
    assert inverse(p).values[p.values[0] - 1] == 1


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30, unique=True))
def test_reduce_preserves_order(xs):
    p = reduce_sequence(xs)
    for i, j in itertools.combinations(range(len(xs)), 2):
        assert (xs[i] < xs[j]) == (p[i] < p[j])


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 1000), st.integers(0, 2**32 - 1))
def test_decode_large_n(n, seed):
    rng = np.random.default_rng(seed)
    x = tuple(int(rng.integers(0, j)) for j in range(2, n + 1))
    p = lehmer_decode(LehmerCode(n, x))
    assert sorted(p.values) == list(range(1, n + 1))
    assert lehmer_encode(p).x == x
    assert inversion_count(p) == sum(x)


def test_decode_batch_matches_scalar():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3, 9, 64, 257):
        codes = np.stack([rng.integers(0, j, size=50) for j in range(2, n + 1)], axis=1) if n > 1 else np.zeros((50, 0))
        out = decode_batch(codes, n)
        for row, code in zip(out, codes):
            assert tuple(row.tolist()) == lehmer_decode(LehmerCode(n, tuple(code.tolist()))).values
