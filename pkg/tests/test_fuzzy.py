
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedmlfs.errors import ConfigError
from fedmlfs.fuzzy import (EntropyTable, FuzzySimilarityMatrix,
                           build_similarity_matrix, complementary_conditional_entropy,
                           complementary_entropy, complementary_joint_entropy,
                           complementary_mutual_information, correlation_distance,
                           entropy_table, entropy_table_from_blocks, frame_length,
                           fuzzy_cardinality_row, fuzzy_lower_approximation,
                           fuzzy_radius, fuzzy_upper_approximation)

from _oracles import (brute_ce, brute_cje, brute_cmi, brute_cce, brute_lower,
                      brute_similarity, brute_upper, pooled_std)


class TestFuzzyRadius:
    def test_direct_division(self):
        assert fuzzy_radius(0.6, 1.2) == pytest.approx(0.5, abs=1e-15)

    def test_constant_feature(self):
        assert fuzzy_radius(0.0, 1.2) == 0.0

    def test_pooled_std_example(self):
        std = pooled_std([np.array([0.0, 1.0]), np.array([0.0, 1.0])])
        assert std == pytest.approx(0.5773502691896258, abs=1e-12)
        assert fuzzy_radius(std, 1.2) == pytest.approx(0.4811252243246881, abs=1e-9)

    @pytest.mark.parametrize("divisor", [0.39, 2.01, 0.0, -1.0])
    def test_divisor_range(self, divisor):
        with pytest.raises(ConfigError):
            fuzzy_radius(0.5, divisor)

    def test_negative_std(self):
        with pytest.raises(ValueError):
            fuzzy_radius(-0.1, 1.2)


class TestBuildSimilarity:
    def test_hand_matrix(self):
        m = build_similarity_matrix([0.0, 0.1, 0.9], 0.2)
        expected = np.array([[1.0, 0.9, 0.0], [0.9, 1.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(m.values, expected, atol=1e-15)

    def test_radius_one_never_truncates(self, rng):
        col = rng.random(20)
        m = build_similarity_matrix(col, 1.0)
        gaps = np.abs(col[:, None] - col[None, :])
        np.testing.assert_allclose(m.values, 1.0 - gaps, atol=1e-15)

    def test_equal_values_zero_radius(self):
        m = build_similarity_matrix([0.5, 0.5], 0.0)
        np.testing.assert_array_equal(m.values, np.ones((2, 2)))

    def test_matches_brute_force(self, rng):
        col = rng.random(17)
        m = build_similarity_matrix(col, 0.3)
        np.testing.assert_array_equal(m.values, brute_similarity(col, 0.3))

    def test_rejects_matrix_input(self):
        with pytest.raises(ValueError):
            build_similarity_matrix(np.zeros((3, 3)), 0.2)


class TestCardinality:
    def test_hand_row(self):
        m = build_similarity_matrix([0.0, 0.1, 0.9], 0.2)
        assert fuzzy_cardinality_row(m, 0) == pytest.approx(1.9, abs=1e-12)

    def test_identity_row(self):
        assert fuzzy_cardinality_row(np.eye(5), 2) == 1.0

    def test_all_ones(self):
        assert fuzzy_cardinality_row(np.ones((4, 4)), 1) == 4.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            fuzzy_cardinality_row(np.eye(3), 3)


class TestEntropyMeasures:
    def test_ce_hand_value(self, toy_pair):
        f, _ = toy_pair
        assert complementary_entropy(f) == pytest.approx(1.4 / 3, abs=1e-12)

    def test_ce_all_ones(self):
        assert complementary_entropy(np.ones((6, 6))) == pytest.approx(0.0, abs=1e-15)

    def test_ce_identity_bound(self):
        assert complementary_entropy(np.eye(3)) == pytest.approx(2.0 / 3, abs=1e-15)

    def test_ce_empty_universe(self):
        with pytest.raises(ValueError):
            complementary_entropy(np.zeros((0, 0)))

    def test_cje_hand_value(self, toy_pair):
        f, g = toy_pair
        assert complementary_joint_entropy(f, g) == pytest.approx(2.0 / 3, abs=1e-12)

    def test_cje_self_join(self, toy_pair):
        f, _ = toy_pair
        cje = complementary_joint_entropy(f, f)
        assert cje == pytest.approx(complementary_entropy(f), abs=1e-15)

    def test_cje_identities(self):
        assert complementary_joint_entropy(np.eye(3), np.eye(3)) == pytest.approx(2 / 3)

    def test_dimension_mismatch(self, toy_pair):
        f, _ = toy_pair
        with pytest.raises(ValueError):
            complementary_joint_entropy(f, np.eye(4))

    def test_cce_hand_value(self, toy_pair):
        f, g = toy_pair
        assert complementary_conditional_entropy(f, g) == pytest.approx(0.2, abs=1e-12)

    def test_cce_self(self, toy_pair):
        f, _ = toy_pair
        assert complementary_conditional_entropy(f, f) == pytest.approx(0.0, abs=1e-15)

    def test_cce_given_all_ones_is_zero(self, toy_pair):
        _, g = toy_pair
        assert complementary_conditional_entropy(np.ones((3, 3)), g) == pytest.approx(0.0, abs=1e-15)

    def test_cmi_hand_value(self, toy_pair):
        f, g = toy_pair
        assert complementary_mutual_information(f, g) == pytest.approx(0.8 / 3, abs=1e-12)

    def test_cmi_self(self, toy_pair):
        f, _ = toy_pair
        assert complementary_mutual_information(f, f) == pytest.approx(1.4 / 3, abs=1e-12)

    def test_cmi_identity_matrices(self):
        assert complementary_mutual_information(np.eye(3), np.eye(3)) == pytest.approx(2 / 3)

    def test_corr_dist_hand_value(self, toy_pair):
        f, g = toy_pair
        assert correlation_distance(f, g) == pytest.approx(0.4, abs=1e-12)

    def test_corr_dist_self(self, toy_pair):
        f, _ = toy_pair
        assert correlation_distance(f, f) == 0.0

    def test_corr_dist_vs_all_ones(self, toy_pair):
        f, _ = toy_pair
        ones = np.ones((3, 3))
        assert correlation_distance(f, ones) == pytest.approx(
            complementary_entropy(f), abs=1e-12)


class TestApproximations:
    def test_lower_identity_relation(self, rng):
        memb = rng.random(6)
        np.testing.assert_allclose(fuzzy_lower_approximation(np.eye(6), memb),
                                   memb, atol=1e-15)

    def test_lower_universe(self):
        rel = build_similarity_matrix([0.1, 0.4, 0.6], 0.5).values
        out = fuzzy_lower_approximation(rel, np.ones(3))
        np.testing.assert_array_equal(out, np.ones(3))

    def test_lower_hand_value(self):
        rel = np.array([[1.0, 0.9], [0.9, 1.0]])
        out = fuzzy_lower_approximation(rel, [1.0, 0.0])
        np.testing.assert_allclose(out, [0.1, 0.0], atol=1e-12)

    def test_upper_identity_relation(self, rng):
        memb = rng.random(6)
        np.testing.assert_allclose(fuzzy_upper_approximation(np.eye(6), memb),
                                   memb, atol=1e-15)

    def test_upper_empty_set(self):
        rel = np.array([[1.0, 0.9], [0.9, 1.0]])
        np.testing.assert_array_equal(fuzzy_upper_approximation(rel, [0.0, 0.0]),
                                      [0.0, 0.0])

    def test_upper_hand_value(self):
        rel = np.array([[1.0, 0.9], [0.9, 1.0]])
        out = fuzzy_upper_approximation(rel, [1.0, 0.0])
        np.testing.assert_allclose(out, [1.0, 0.9], atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fuzzy_lower_approximation(np.eye(3), [1.0, 0.0])

    def test_matches_brute_force(self, rng):
        rel = build_similarity_matrix(rng.random(9), 0.6).values
        memb = rng.random(9)
        np.testing.assert_allclose(fuzzy_lower_approximation(rel, memb),
                                   brute_lower(rel, memb), atol=1e-15)
        np.testing.assert_allclose(fuzzy_upper_approximation(rel, memb),
                                   brute_upper(rel, memb), atol=1e-15)


small_column = st.lists(st.floats(min_value=0.0, max_value=1.0,
                                  allow_nan=False), min_size=2, max_size=50)


@st.composite
def similarity_pairs(draw):
    col_a = draw(small_column)
    col_b = draw(st.lists(st.floats(min_value=0.0, max_value=1.0,
                                    allow_nan=False),
                          min_size=len(col_a), max_size=len(col_a)))
    rad_a = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    rad_b = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    return (build_similarity_matrix(col_a, rad_a),
            build_similarity_matrix(col_b, rad_b))


class TestAlgebraicIdentities:
    @given(similarity_pairs())
    @settings(max_examples=200, deadline=None)
    def test_identity_suite(self, pair):
        a, b = pair
        ce_a = complementary_entropy(a)
        ce_b = complementary_entropy(b)
        cje = complementary_joint_entropy(a, b)
        cmi = complementary_mutual_information(a, b)
        cce = complementary_conditional_entropy(a, b)
        assert abs(complementary_joint_entropy(a, a) - ce_a) < 1e-12
        assert abs(cmi - (ce_a + ce_b - cje)) < 1e-12
        assert abs(cce - (cje - ce_b)) < 1e-12
        assert correlation_distance(a, b) >= 0.0
        assert abs(correlation_distance(a, b) - (cje - cmi)) < 1e-12

    @given(small_column, st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    @settings(max_examples=150, deadline=None)
    def test_bounds_and_structure(self, col, radius):
        m = build_similarity_matrix(col, radius)
        n = m.n
        v = m.values
        assert np.array_equal(v, v.T)
        assert np.all(np.diag(v) == 1.0)
        off = v[~np.eye(n, dtype=bool)]
        nonzero = off[off > 0.0]
        if nonzero.size:
            assert nonzero.min() >= 1.0 - radius - 1e-12
        ce = complementary_entropy(m)
        assert -1e-12 <= ce <= 1.0 - 1.0 / n + 1e-12
        m.validate()

    @given(small_column,
           st.floats(min_value=0.0, max_value=0.5, allow_nan=False),
           st.floats(min_value=0.0, max_value=0.5, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_radius_monotonicity(self, col, rad, extra):
        small = build_similarity_matrix(col, rad)
        large = build_similarity_matrix(col, rad + extra)
        assert np.all(large.values >= small.values)
        assert complementary_entropy(large) <= complementary_entropy(small) + 1e-12

    @given(similarity_pairs())
    @settings(max_examples=100, deadline=None)
    def test_lower_below_upper_on_crisp_sets(self, pair):
        a, _ = pair
        crisp = (np.arange(a.n) % 2).astype(float)
        lower = fuzzy_lower_approximation(a, crisp)
        upper = fuzzy_upper_approximation(a, crisp)
        assert np.all(lower <= upper + 1e-15)


class TestAgainstBruteForce:
    def test_measures_match_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 30))
            a = build_similarity_matrix(rng.random(n), float(rng.uniform(0, 1)))
            b = build_similarity_matrix(rng.random(n), float(rng.uniform(0, 1)))
            assert complementary_entropy(a) == pytest.approx(brute_ce(a.values), abs=1e-12)
            assert complementary_joint_entropy(a, b) == pytest.approx(
                brute_cje(a.values, b.values), abs=1e-12)
            assert complementary_mutual_information(a, b) == pytest.approx(
                brute_cmi(a.values, b.values), abs=1e-12)
            assert complementary_conditional_entropy(a, b) == pytest.approx(
                brute_cce(a.values, b.values), abs=1e-12)


class TestEntropyTable:
    def test_table_matches_pairwise_ops(self, rng):
        mats = [build_similarity_matrix(rng.random(12), float(rng.uniform(0, 1)))
                for _ in range(5)]
        table = entropy_table(mats)
        assert isinstance(table, EntropyTable)
        assert table.universe_size == 12
        for p in range(5):
            assert table.ce[p] == pytest.approx(complementary_entropy(mats[p]), abs=1e-12)
            assert table.cje[p, p] == table.ce[p]
            assert table.cmi[p, p] == pytest.approx(table.ce[p], abs=1e-15)
            assert table.corr_dist[p, p] == 0.0
            for b in range(5):
                assert table.cje[p, b] == pytest.approx(
                    complementary_joint_entropy(mats[p], mats[b]), abs=1e-12)
                assert table.cmi[p, b] == pytest.approx(
                    table.ce[p] + table.ce[b] - table.cje[p, b], abs=1e-12)
                assert table.corr_dist[p, b] >= 0.0
        np.testing.assert_allclose(table.cje, table.cje.T, atol=0)
        np.testing.assert_allclose(table.corr_dist, table.corr_dist.T, atol=0)

    def test_blocks_equal_dense(self, rng):
        d = 4
        sizes = [3, 5, 2]
        blocks = []
        dense = [np.zeros((sum(sizes), sum(sizes))) for _ in range(d)]
        at = 0
        for size in sizes:
            stack = []
            for p in range(d):
                m = build_similarity_matrix(rng.random(size), 0.4)
                stack.append(m.values)
                dense[p][at:at + size, at:at + size] = m.values
            blocks.append(np.stack(stack))
            at += size
        from_blocks = entropy_table_from_blocks(blocks)
        from_dense = entropy_table(dense)
        np.testing.assert_allclose(from_blocks.ce, from_dense.ce, atol=1e-12)
        np.testing.assert_allclose(from_blocks.cje, from_dense.cje, atol=1e-12)
        np.testing.assert_allclose(from_blocks.cmi, from_dense.cmi, atol=1e-12)
        np.testing.assert_allclose(from_blocks.corr_dist, from_dense.corr_dist,
                                   atol=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            entropy_table([])
        with pytest.raises(ValueError):
            entropy_table_from_blocks([])


class TestSerialization:
    def test_round_trip(self, rng):
        m = build_similarity_matrix(rng.random(7), 0.35)
        m.feature_id = 42
        frame = m.to_bytes()
        assert len(frame) == frame_length(7) == 16 + 8 * 49
        back = FuzzySimilarityMatrix.from_bytes(frame)
        assert back.feature_id == 42
        assert back.radius == m.radius
        np.testing.assert_array_equal(back.values, m.values)

    def test_bad_length_rejected(self, rng):
        frame = build_similarity_matrix(rng.random(4), 0.5).to_bytes()
        with pytest.raises(ValueError):
            FuzzySimilarityMatrix.from_bytes(frame[:-8])

    def test_validate_catches_violations(self):
        bad = FuzzySimilarityMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]), radius=1.0)
        with pytest.raises(ValueError):
            bad.validate()
        bad_diag = FuzzySimilarityMatrix(np.array([[0.9, 0.0], [0.0, 1.0]]), radius=1.0)
        with pytest.raises(ValueError):
            bad_diag.validate()


def test_degenerate_constant_feature_pipeline():
    # std 0 -> radius 0 -> crisp equality relation, entropy well-defined
    radius = fuzzy_radius(0.0, 1.2)
    m = build_similarity_matrix([0.0, 0.0, 0.0], radius)
    np.testing.assert_array_equal(m.values, np.ones((3, 3)))
    assert complementary_entropy(m) == 0.0
    mixed = build_similarity_matrix([0.0, 0.0, 0.7], radius)
    assert complementary_entropy(mixed) == pytest.approx(brute_ce(mixed.values), abs=1e-15)
