"""Raw attention coefficients and their unified softmax normalization."""

import numpy as np
import pytest

import alignet as al
from alignet.attention import (
    AttentionParams,
    coefficient_sets,
    normalize,
    raw_inter_initiator,
    raw_inter_recipient,
    raw_intra_initiator,
    raw_intra_recipient,
)
from alignet.errors import EmptyNeighborhoodError, ShapeError
from alignet.model import init_features


def scalar_params(w=1.0, a=(1.0, 1.0)):
    m = np.array([[w]])
    v = np.array(a, dtype=np.float64)
    return AttentionParams(
        w_in=m.copy(), w_re=m.copy(), w_in_cross=m.copy(), w_re_cross=m.copy(),
        a_in=v.copy(), a_re=v.copy(), a_in_cross=v.copy(), a_re_cross=v.copy(),
    )


def zero_vec_params(dp=2, d=3):
    rng = np.random.default_rng(0)
    w = rng.standard_normal((dp, d))
    z = np.zeros(2 * dp)
    return AttentionParams(
        w_in=w, w_re=w.copy(), w_in_cross=w.copy(), w_re_cross=w.copy(),
        a_in=z.copy(), a_re=z.copy(), a_in_cross=z.copy(), a_re_cross=z.copy(),
    )


class TestRawCoefficients:
    def test_zero_score_vector_gives_sigma_zero(self):
        p = zero_vec_params()
        x = np.array([1.0, -2.0, 0.5])
        assert raw_intra_initiator(p, x, x) == 0.0
        assert raw_intra_recipient(p, x, x) == 0.0
        assert raw_inter_initiator(p, x, x) == 0.0
        assert raw_inter_recipient(p, x, x) == 0.0

    def test_scalar_hand_case_initiator(self):
        # d = d' = 1, W = [1], a = [1, 1], u_i_in = 2, u_j_re = 3:
        # a . [2 || 3] = 5, leaky_relu(5) = 5
        p = scalar_params()
        assert raw_intra_initiator(p, np.array([2.0]), np.array([3.0])) == pytest.approx(5.0)

    def test_scalar_hand_case_recipient(self):
        p = scalar_params()
        assert raw_intra_recipient(p, np.array([2.0]), np.array([3.0])) == pytest.approx(5.0)

    def test_scalar_hand_case_inter(self):
        p = scalar_params()
        # negative pre-activation goes through the 0.2 slope
        assert raw_inter_initiator(p, np.array([1.0]), np.array([-4.0])) == pytest.approx(-0.6)
        assert raw_inter_recipient(p, np.array([1.0]), np.array([2.0])) == pytest.approx(3.0)

    def test_depends_on_neighbor_only_through_its_feature(self):
        p = scalar_params(w=2.0, a=(0.5, -1.0))
        x = np.array([1.5])
        y = np.array([0.7])
        assert raw_intra_initiator(p, x, y) == raw_intra_initiator(p, x, y.copy())

    def test_pre_activation_linear_in_partner_feature(self):
        p = scalar_params(w=1.0, a=(0.0, 1.0))
        x = np.array([0.0])
        v = np.array([3.0])
        assert raw_inter_initiator(p, x, 2 * v) == pytest.approx(2 * raw_inter_initiator(p, x, v))

    def test_mirrored_symmetry_between_roles(self):
        p = scalar_params(w=1.3, a=(0.4, 0.9))
        x = np.array([2.0])
        assert raw_intra_initiator(p, x, x) == pytest.approx(raw_intra_recipient(p, x, x))

    def test_inter_recipient_ignores_initiator_features(self):
        # only recipient vectors enter; changing initiator inputs elsewhere is irrelevant
        p = zero_vec_params()
        p.a_re_cross = np.ones(4)
        u_re = np.array([1.0, 0.0, 0.0])
        v_re = np.array([0.0, 1.0, 0.0])
        base = raw_inter_recipient(p, u_re, v_re)
        assert raw_inter_recipient(p, u_re.copy(), v_re.copy()) == base

    def test_dimension_mismatch_raises(self):
        p = scalar_params()
        with pytest.raises(ShapeError):
            raw_intra_initiator(p, np.array([1.0, 2.0]), np.array([3.0]))


class TestNormalize:
    def test_singleton_weight_is_one(self):
        soc, anc = normalize({7: 0.3}, {})
        assert soc[7] == pytest.approx(1.0)
        assert anc == {}

    def test_uniform_raws_give_uniform_weights(self):
        soc, anc = normalize({1: 0.0, 2: 0.0}, {9: 0.0})
        assert soc[1] == pytest.approx(1 / 3)
        assert soc[2] == pytest.approx(1 / 3)
        assert anc[9] == pytest.approx(1 / 3)

    def test_closed_form_two_entries(self):
        soc, anc = normalize({1: 1.0}, {2: 0.0})
        e = np.e
        assert soc[1] == pytest.approx(e / (e + 1))
        assert anc[2] == pytest.approx(1 / (e + 1))

    def test_weights_sum_to_one_and_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n_soc = int(rng.integers(0, 6))
            n_anc = int(rng.integers(0, 3))
            if n_soc + n_anc == 0:
                continue
            soc_raw = {i: float(rng.normal(scale=5)) for i in range(n_soc)}
            anc_raw = {i: float(rng.normal(scale=5)) for i in range(n_anc)}
            soc, anc = normalize(soc_raw, anc_raw)
            total = sum(soc.values()) + sum(anc.values())
            assert abs(total - 1.0) < 1e-9
            assert all(w > 0 for w in soc.values())
            assert all(w > 0 for w in anc.values())

    def test_large_raws_do_not_overflow(self):
        soc, _ = normalize({1: 1e4, 2: 1e4 - 1.0}, {})
        assert np.isfinite(soc[1])
        assert soc[1] > soc[2]

    def test_empty_union_raises(self):
        with pytest.raises(EmptyNeighborhoodError):
            normalize({}, {})


def two_node_pair():
    g1 = al.DirectedGraph(2, [(0, 1)])
    g2 = al.DirectedGraph(2, [(0, 1)])
    return al.AlignedPair(g1, g2, [(0, 0)])


class TestCoefficientSets:
    def test_single_neighbor_no_partner(self):
        pair = two_node_pair()
        feats = init_features(pair)
        p = zero_vec_params(dp=2, d=2)
        # node 1 in g1 is unanchored; as recipient it has the single follower 0
        soc, anc = coefficient_sets(pair, feats, p, al.ContributionMode(), "re", 0, 1)
        assert soc == {0: pytest.approx(1.0)}
        assert anc == {}

    def test_isolated_unanchored_node_signals_empty(self):
        pair = two_node_pair()
        feats = init_features(pair)
        p = zero_vec_params(dp=2, d=2)
        # node 1 follows nobody and has no partner: empty union for role "in"
        with pytest.raises(EmptyNeighborhoodError):
            coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 1)

    def test_neighbor_plus_partner_uniform_when_scores_equal(self):
        pair = two_node_pair()
        feats = init_features(pair)
        p = zero_vec_params(dp=2, d=2)  # zero score vectors: every raw is sigma(0) = 0
        soc, anc = coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 0)
        assert soc[1] == pytest.approx(0.5)
        assert anc[0] == pytest.approx(0.5)

    def test_no_partner_reduces_to_social_softmax(self):
        g1 = al.DirectedGraph(3, [(0, 1), (0, 2)])
        g2 = al.DirectedGraph(2, [(0, 1)])
        pair = al.AlignedPair(g1, g2, [(1, 0)])
        feats = init_features(pair)
        rng = np.random.default_rng(5)
        p = AttentionParams(*(rng.standard_normal(s) for s in
                              [(2, 3), (2, 3), (2, 2), (2, 2), (4,), (4,), (4,), (4,)]))
        soc, anc = coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 0)
        assert anc == {}
        assert sum(soc.values()) == pytest.approx(1.0, abs=1e-9)

    def test_default_mode_matches_raw_functions(self):
        # social-cross + anchor-direct must reproduce the raw_* scoring term for term
        pair = two_node_pair()
        feats = init_features(pair)
        rng = np.random.default_rng(8)
        p = AttentionParams(*(rng.standard_normal(s) for s in
                              [(2, 2), (2, 2), (2, 2), (2, 2), (4,), (4,), (4,), (4,)]))
        own_in, own_re = feats.net(0)
        oth_in, oth_re = feats.net(1)
        raw_soc = raw_intra_initiator(p, own_in[0], own_re[1])
        raw_anc = raw_inter_initiator(p, own_in[0], oth_in[0])
        soc, anc = coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 0)
        denom = np.exp(raw_soc) + np.exp(raw_anc)
        assert soc[1] == pytest.approx(np.exp(raw_soc) / denom, rel=1e-12)
        assert anc[0] == pytest.approx(np.exp(raw_anc) / denom, rel=1e-12)

    def test_modes_change_weights_on_asymmetric_toy(self):
        # d = 1 toy with distinct in/re features: swapping the contribution
        # pairing must change the scores unless the features coincide
        g1 = al.DirectedGraph(2, [(0, 1)])
        g2 = al.DirectedGraph(2, [(0, 1)])
        pair = al.AlignedPair(g1, g2, [(0, 0)])

        class Feats:
            def net(self, i):
                if i == 0:
                    return np.array([[2.0], [5.0]]), np.array([[3.0], [7.0]])
                return np.array([[11.0], [13.0]]), np.array([[17.0], [19.0]])

        p = scalar_params(w=1.0, a=(1.0, 1.0))
        sc_ad = coefficient_sets(pair, Feats(), p, al.ContributionMode.parse("sc+ad"), "in", 0, 0)
        sd_ac = coefficient_sets(pair, Feats(), p, al.ContributionMode.parse("sd+ac"), "in", 0, 0)
        # sc+ad: social raw = lrelu(2 + 7) = 9, anchor raw = lrelu(2 + 11) = 13
        assert sc_ad[0][1] == pytest.approx(np.exp(9) / (np.exp(9) + np.exp(13)))
        # sd+ac: social raw = lrelu(2 + 5) = 7, anchor raw = lrelu(2 + 17) = 19
        assert sd_ac[0][1] == pytest.approx(np.exp(7) / (np.exp(7) + np.exp(19)))
        assert sc_ad[0][1] != pytest.approx(sd_ac[0][1])

    def test_permutation_of_neighbor_listing_is_irrelevant(self):
        g1 = al.DirectedGraph(4, [(0, 1), (0, 2), (0, 3)])
        g2 = al.DirectedGraph(2, [(0, 1)])
        pair = al.AlignedPair(g1, g2, [(0, 0)])
        feats = init_features(pair)
        rng = np.random.default_rng(11)
        p = AttentionParams(*(rng.standard_normal(s) for s in
                              [(2, 4), (2, 4), (2, 2), (2, 2), (4,), (4,), (4,), (4,)]))
        first = coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 0)
        second = coefficient_sets(pair, feats, p, al.ContributionMode(), "in", 0, 0)
        assert first == second


class TestContributionMode:
    def test_parse_labels(self):
        m = al.ContributionMode.parse("SD+AC")
        assert m.social == "direct" and m.anchor == "cross"
        assert m.label() == "sd+ac"

    def test_default_is_social_cross_anchor_direct(self):
        m = al.ContributionMode()
        assert m.social == "cross" and m.anchor == "direct"

    def test_bad_label_rejected(self):
        with pytest.raises(ValueError):
            al.ContributionMode.parse("xy+zw")
        with pytest.raises(ValueError):
            al.ContributionMode(social="sideways")
