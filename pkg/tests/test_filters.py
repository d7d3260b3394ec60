import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permsolve import filters
from permsolve.errors import DimensionMismatchError, DocumentError, InvalidParameterError
from permsolve.filters import (
    DISJOINT_BLOCKS,
    FilterMatrix,
    SparseSpec,
    generate_sparse_matrix,
    support,
)
from permsolve.spectral import CombSpec, make_comb


def supports_of(matrix, tol=1e-12):
    return [
        set(support(matrix.filter(i, j), tol).tolist())
        for i in range(matrix.channels)
        for j in range(matrix.sources)
    ]


class TestGeneration:
    def test_dense_filter_is_fully_supported(self):
        m = generate_sparse_matrix(1, 1, 4, SparseSpec(k=4), seed=11)
        assert supports_of(m) == [{0, 1, 2, 3}]

    def test_paper_protocol_shape(self):
        # the reference Monte-Carlo protocol draws k=3 filters at L=31
        m = generate_sparse_matrix(2, 2, 31, SparseSpec(k=3), seed=5)
        assert m.entries.shape == (2, 2, 31)
        assert all(len(s) == 3 for s in supports_of(m))

    def test_disjoint_blocks_supports_are_disjoint(self):
        m = generate_sparse_matrix(1, 2, 8, SparseSpec(k=4, support_mode=DISJOINT_BLOCKS), seed=3)
        s = supports_of(m)
        assert s[0] & s[1] == set()
        assert len(s[0] | s[1]) <= 8

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_disjoint_blocks_rows_independent(self, seed):
        m = generate_sparse_matrix(3, 3, 16, SparseSpec(k=4, support_mode=DISJOINT_BLOCKS), seed=seed)
        for i in range(3):
            row = [set(support(m.filter(i, j), 1e-12).tolist()) for j in range(3)]
            for a in range(3):
                for b in range(a + 1, 3):
                    assert row[a] & row[b] == set()

    def test_determinism(self):
        a = generate_sparse_matrix(2, 3, 17, SparseSpec(k=2), seed=42)
        b = generate_sparse_matrix(2, 3, 17, SparseSpec(k=2), seed=42)
        c = generate_sparse_matrix(2, 3, 17, SparseSpec(k=2), seed=43)
        assert np.array_equal(a.entries, b.entries)
        assert not np.array_equal(a.entries, c.entries)

    def test_coefficients_are_real_gaussian(self):
        m = generate_sparse_matrix(1, 1, 64, SparseSpec(k=64), seed=9)
        assert np.all(m.entries.imag == 0)

    def test_support_cardinality_at_scale(self):
        # 10^4 filters in one grid: every support has exactly k entries
        m = generate_sparse_matrix(100, 100, 16, SparseSpec(k=3), seed=1)
        counts = np.count_nonzero(np.abs(m.entries) > 0, axis=2)
        assert np.all(counts == 3)

    def test_rejects_oversparse(self):
        with pytest.raises(InvalidParameterError):
            generate_sparse_matrix(1, 1, 4, SparseSpec(k=5), seed=0)

    def test_rejects_infeasible_disjoint(self):
        with pytest.raises(InvalidParameterError):
            generate_sparse_matrix(1, 3, 8, SparseSpec(k=3, support_mode=DISJOINT_BLOCKS), seed=0)

    def test_rejects_bad_mode(self):
        with pytest.raises(InvalidParameterError):
            SparseSpec(k=1, support_mode="dense")


class TestSupport:
    def test_zero_vector(self):
        assert support(np.zeros(5), 0.0).size == 0

    def test_tolerance_excludes_small_entries(self):
        got = support(np.array([1.0, 0.0, 1e-12, 0.0]), 1e-9)
        assert got.tolist() == [0]

    def test_comb_support(self):
        comb = make_comb(CombSpec(L=8, q=2))
        assert support(comb, 1e-9).tolist() == [0, 4]

    def test_negative_tolerance_rejected(self):
        with pytest.raises(InvalidParameterError):
            support(np.ones(3), -1.0)

    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=16),
        st.floats(0, 1),
    )
    @settings(max_examples=100, deadline=None)
    def test_threshold_property(self, values, tol):
        arr = np.asarray(values)
        got = set(support(arr, tol).tolist())
        assert got == {t for t, v in enumerate(values) if abs(v) > tol}


class TestDocuments:
    def test_round_trip_bit_exact(self):
        m = generate_sparse_matrix(2, 2, 9, SparseSpec(k=4), seed=8)
        # make entries genuinely complex so both components round-trip
        entries = m.entries * np.exp(0.37j)
        m = FilterMatrix(entries)
        back = filters.loads(filters.dumps(m))
        assert np.array_equal(back.entries, m.entries)

    def test_seventeen_digit_rendering(self):
        m = FilterMatrix(np.full((1, 1, 1), 0.1 + 0.0j))
        assert "0.10000000000000001" in filters.dumps(m)

    def test_complex_pair_parses(self):
        doc = {"M": 1, "N": 1, "L": 2, "filters": [[[1.5, -2.0], [0.0, 3.25]]]}
        m = filters.from_document(doc)
        assert m.filter(0, 0).tolist() == [1.5 - 2.0j, 3.25j]

    def test_row_length_mismatch(self):
        doc = {"M": 1, "N": 1, "L": 3, "filters": [[[1.0, 0.0]]]}
        with pytest.raises(DimensionMismatchError):
            filters.from_document(doc)

    def test_filter_count_mismatch(self):
        doc = {"M": 2, "N": 2, "L": 1, "filters": [[[1.0, 0.0]]]}
        with pytest.raises(DimensionMismatchError):
            filters.from_document(doc)

    def test_malformed_json_reports_location(self):
        with pytest.raises(DocumentError) as err:
            filters.loads('{"M": 1, "N": 1,\n "L": }')
        assert "line 2" in str(err.value)

    def test_non_object_document(self):
        with pytest.raises(DocumentError):
            filters.from_document([1, 2, 3])


class TestFilterMatrix:
    def test_rejects_nan(self):
        bad = np.ones((1, 1, 2), dtype=complex)
        bad[0, 0, 0] = np.nan
        with pytest.raises(InvalidParameterError):
            FilterMatrix(bad)

    def test_rejects_wrong_rank(self):
        with pytest.raises(InvalidParameterError):
            FilterMatrix(np.ones((2, 2)))

    def test_entries_read_only(self):
        m = FilterMatrix(np.ones((1, 1, 2), dtype=complex))
        with pytest.raises(ValueError):
            m.entries[0, 0, 0] = 5.0

    def test_default_zero_tol_scales_with_matrix(self):
        m = np.zeros((1, 1, 2), dtype=complex)
        assert filters.default_zero_tol(m) == 1e-9
        m[0, 0, 0] = 100.0
        assert filters.default_zero_tol(m) == pytest.approx(1e-7)
