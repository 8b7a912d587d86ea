import math

import pytest

from causalsafety.inference import marginal
from causalsafety.intervention import PathSet, negated_state_distribution
from causalsafety.metrics import (
    ASSOCIATIONAL,
    INTERVENTIONAL,
    TargetEvent,
    ace_rce,
    birnbaum_cbn,
    event_probability,
    path_metrics,
    rce_dichotomic,
    rce_pairwise,
    rrw,
    rrw_dichotomic,
    tornado,
)
from causalsafety.network import CausalNetwork, Cpt, Variable

PI1 = "TrafficDensity->Occlusion->Sen1->Fusion"
PI2 = "TrafficDensity->Sen2->Fusion"

# Exact values on the bundled models, frozen from the enumeration oracle.
BASELINE_FN = 1.863424472088e-4


def independent_pair():
    """Y depends on nothing; X exists but is irrelevant."""
    return CausalNetwork(
        (Variable("X", ("a", "b")), Variable("Y", ("fail", "ok"))),
        (Cpt("X", (), ((0.3, 0.7),)),
         Cpt("Y", (), ((0.2, 0.8),))))


def confounded_noncause():
    """W -> X and W -> Y: X is associated with Y but causally irrelevant."""
    return CausalNetwork(
        (Variable("W", ("w0", "w1")), Variable("X", ("a", "b")),
         Variable("Y", ("fail", "ok"))),
        (Cpt("W", (), ((0.5, 0.5),)),
         Cpt("X", ("W",), ((0.9, 0.1), (0.1, 0.9))),
         Cpt("Y", ("W",), ((0.3, 0.7), (0.05, 0.95)))))


class TestRrw:
    def test_occlusion_categorical(self, perception, fusion_fn):
        assoc = rrw(perception, fusion_fn, "Occlusion", "none", ASSOCIATIONAL)
        interv = rrw(perception, fusion_fn, "Occlusion", "none", INTERVENTIONAL)
        assert assoc.value == pytest.approx(2.49, abs=0.02)
        assert interv.value == pytest.approx(1.97, abs=0.02)
        assert assoc.metric == "RRW"
        assert interv.metric == "IRRW"

    def test_root_equality(self, perception, fusion_fn):
        assoc = rrw(perception, fusion_fn, "TrafficDensity", "low", ASSOCIATIONAL)
        interv = rrw(perception, fusion_fn, "TrafficDensity", "low", INTERVENTIONAL)
        assert assoc.value == pytest.approx(4.64, abs=0.02)
        assert assoc.value == pytest.approx(interv.value, abs=1e-9)

    def test_independent_variable_gives_one(self, ):
        network = independent_pair()
        value = rrw(network, TargetEvent("Y", "fail"), "X", "a")
        assert value.value == pytest.approx(1.0, abs=1e-12)

    def test_bad_mode_rejected(self, perception, fusion_fn):
        with pytest.raises(ValueError, match="mode"):
            rrw(perception, fusion_fn, "Occlusion", "none", "both")


class TestAceRce:
    def test_traffic_density_high(self, perception, fusion_fn):
        ace, rce = ace_rce(perception, fusion_fn, "TrafficDensity", "high", "low")
        assert rce.value == pytest.approx(9.64, abs=0.02)
        assert ace.value == pytest.approx(3.47e-4, abs=0.02e-4)

    def test_object_size_large_protective(self, perception, fusion_fn):
        _, rce = ace_rce(perception, fusion_fn, "ObjectSize", "large", "normal")
        assert rce.value == pytest.approx(0.51, abs=0.02)

    def test_reference_state_is_identity(self, perception, fusion_fn, analysis_config):
        for name, roles in analysis_config.variables:
            ace, rce = ace_rce(perception, fusion_fn, name, roles.reference,
                               roles.reference)
            assert ace.value == 0.0
            assert rce.value == 1.0

    def test_provenance_recomputes(self, perception, fusion_fn):
        ace, rce = ace_rce(perception, fusion_fn, "Occlusion", "largely", "none")
        p_x = rce.query("P(Fusion=FN|do(Occlusion=largely))")
        p_ref = rce.query("P(Fusion=FN|do(Occlusion=none))")
        assert ace.value == p_x - p_ref
        assert rce.value == p_x / p_ref


class TestDichotomic:
    def test_binary_variable_equals_categorical(self, perception, fusion_fn):
        # ObjectDistance has two states, so not-far is exactly close
        dich = rce_dichotomic(perception, fusion_fn, "ObjectDistance", "far")
        _, cat = ace_rce(perception, fusion_fn, "ObjectDistance", "far", "close")
        assert dich.value == pytest.approx(cat.value, abs=1e-12)
        assert dich.value == pytest.approx(5.36, abs=0.02)

    def test_object_size_small(self, perception, fusion_fn):
        assert rce_dichotomic(perception, fusion_fn, "ObjectSize", "small").value \
            == pytest.approx(3.525210, abs=1e-5)

    def test_traffic_density_high_frozen(self, perception, fusion_fn):
        # exact arithmetic; the printed table has 7.46 (see the open question)
        assert rce_dichotomic(perception, fusion_fn, "TrafficDensity", "high").value \
            == pytest.approx(7.408785, abs=1e-5)

    def test_rrw_modes_diverge_for_occlusion(self, perception, fusion_fn):
        assoc = rrw_dichotomic(perception, fusion_fn, "Occlusion", "largely", ASSOCIATIONAL)
        interv = rrw_dichotomic(perception, fusion_fn, "Occlusion", "largely", INTERVENTIONAL)
        assert assoc.value == pytest.approx(1.307803, abs=1e-5)
        assert interv.value == pytest.approx(1.221451, abs=1e-5)

    def test_rrw_modes_agree_for_roots(self, perception, fusion_fn):
        for name in ("ObjectSize", "TrafficDensity", "ObjectDistance"):
            for state in perception.states(name):
                assoc = rrw_dichotomic(perception, fusion_fn, name, state, ASSOCIATIONAL)
                interv = rrw_dichotomic(perception, fusion_fn, name, state, INTERVENTIONAL)
                assert assoc.value == pytest.approx(interv.value, abs=1e-9)


class TestBirnbaum:
    def test_table_values(self, perception, fusion_fn):
        expected = {"ObjectSize": 3.12e-4, "Occlusion": 4.39e-4,
                    "TrafficDensity": 3.35e-4, "ObjectDistance": 3.52e-4}
        failure = {"ObjectSize": "small", "Occlusion": "largely",
                   "TrafficDensity": "high", "ObjectDistance": "far"}
        for name, want in expected.items():
            got = birnbaum_cbn(perception, fusion_fn, name, failure[name], 0.01)
            assert got.value == pytest.approx(want, rel=0.15)

    def test_delta_invariance(self, perception, fusion_fn):
        # the target probability is linear in the shifted marginal, so the
        # central difference is exact for any step
        values = [birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", d).value
                  for d in (0.02, 0.01, 0.005)]
        assert max(values) - min(values) < 1e-12

    def test_interventional_mode_drops_confounding(self, perception, fusion_fn):
        assoc = birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", 0.01)
        interv = birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", 0.01,
                              mode=INTERVENTIONAL)
        assert assoc.value == pytest.approx(4.39e-4, rel=0.01)
        assert interv.value == pytest.approx(2.20e-4, rel=0.01)

    def test_independent_variable_is_zero(self):
        network = independent_pair()
        got = birnbaum_cbn(network, TargetEvent("Y", "fail"), "X", "a", 0.01)
        assert got.value == pytest.approx(0.0, abs=1e-15)

    def test_confounded_noncause_splits_modes(self):
        network = confounded_noncause()
        target = TargetEvent("Y", "fail")
        assoc = birnbaum_cbn(network, target, "X", "a", 0.01)
        interv = birnbaum_cbn(network, target, "X", "a", 0.01, mode=INTERVENTIONAL)
        assert interv.value == pytest.approx(0.0, abs=1e-12)
        assert abs(assoc.value) > 0.1  # association through the common cause

    def test_delta_bounds(self, perception, fusion_fn):
        with pytest.raises(ValueError, match="delta"):
            birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", 0.2)
        with pytest.raises(ValueError, match="delta"):
            birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", 0.0)

    def test_delta_exceeding_marginal_rejected(self):
        network = CausalNetwork(
            (Variable("X", ("a", "b")), Variable("Y", ("fail", "ok"))),
            (Cpt("X", (), ((0.004, 0.996),)),
             Cpt("Y", ("X",), ((0.9, 0.1), (0.1, 0.9)))))
        with pytest.raises(ValueError, match="outside"):
            birnbaum_cbn(network, TargetEvent("Y", "fail"), "X", "a", 0.01)


class TestPairwise:
    def test_peak_pair(self, perception, fusion_fn):
        got = rce_pairwise(perception, fusion_fn,
                           ("Occlusion", "largely", "none"),
                           ("TrafficDensity", "high", "low"))
        assert got.value == pytest.approx(32.1, abs=0.5)

    def test_both_at_reference_is_one(self, perception, fusion_fn):
        got = rce_pairwise(perception, fusion_fn,
                           ("Occlusion", "none", "none"),
                           ("TrafficDensity", "low", "low"))
        assert got.value == pytest.approx(1.0, abs=1e-12)

    def test_same_variable_rejected(self, perception, fusion_fn):
        with pytest.raises(ValueError, match="distinct"):
            rce_pairwise(perception, fusion_fn,
                         ("Occlusion", "largely", "none"),
                         ("Occlusion", "partly", "none"))

    def test_same_path_pairs_rank_low(self, perception, fusion_fn):
        # both triggering conditions feed only the first sensor: the fused
        # voting node needs both channels, so the effect stays suppressed
        same_path = rce_pairwise(perception, fusion_fn,
                                 ("ObjectSize", "small", "normal"),
                                 ("Occlusion", "largely", "none"))
        cross_path = rce_pairwise(perception, fusion_fn,
                                  ("Occlusion", "largely", "none"),
                                  ("TrafficDensity", "high", "low"))
        assert same_path.value < cross_path.value / 3


class TestPathMetrics:
    def test_table_rows(self, perception, fusion_fn):
        ape, rpe, share = path_metrics(perception, fusion_fn, PathSet.parse(PI2),
                                       "high", "low")
        assert ape.value == pytest.approx(2.86e-4, abs=0.05e-4)
        assert rpe.value == pytest.approx(8.13, abs=0.05)
        assert share.value == pytest.approx(0.82, abs=0.01)

    def test_pi1_small_share(self, perception, fusion_fn):
        ape, rpe, share = path_metrics(perception, fusion_fn, PathSet.parse(PI1),
                                       "high", "low")
        assert ape.value == pytest.approx(0.08e-4, abs=0.02e-4)
        assert rpe.value == pytest.approx(1.19, abs=0.02)
        assert share.value == pytest.approx(0.02, abs=0.01)

    def test_active_equals_reference(self, perception, fusion_fn):
        ape, rpe, share = path_metrics(perception, fusion_fn, PathSet.parse(PI2),
                                       "low", "low")
        assert ape.value == pytest.approx(0.0, abs=1e-12)
        assert rpe.value == pytest.approx(1.0, abs=1e-9)
        assert share.is_undefined

    def test_full_pathset_share_is_one(self, perception, fusion_fn):
        _, _, share = path_metrics(perception, fusion_fn,
                                   PathSet.parse(f"{PI1}; {PI2}"), "high", "low")
        assert share.value == pytest.approx(1.0, abs=1e-9)


class TestTornado:
    def test_sorted_by_interventional_gap(self, perception, fusion_fn, analysis_config):
        subjects = [(name, state) for name, _ in analysis_config.variables
                    for state in perception.states(name)]
        rows = tornado(perception, fusion_fn, subjects)
        gaps = [abs(r.interventional - r.baseline) for r in rows]
        assert gaps == sorted(gaps, reverse=True)

    def test_baseline_constant(self, perception, fusion_fn):
        rows = tornado(perception, fusion_fn, [("Occlusion", "largely"),
                                               ("TrafficDensity", "high")])
        assert all(r.baseline == pytest.approx(BASELINE_FN, abs=1e-12) for r in rows)

    def test_roots_have_no_gap_occlusion_does(self, perception, fusion_fn):
        subjects = [("TrafficDensity", "high"), ("ObjectSize", "small"),
                    ("Occlusion", "largely")]
        rows = {r.label: r for r in tornado(perception, fusion_fn, subjects)}
        assert rows["TrafficDensity=high"].conditional == pytest.approx(
            rows["TrafficDensity=high"].interventional, abs=1e-9)
        assert abs(rows["Occlusion=largely"].conditional
                   - rows["Occlusion=largely"].interventional) > 1e-4

    def test_irrelevant_variable_sits_on_baseline(self):
        network = independent_pair()
        rows = tornado(network, TargetEvent("Y", "fail"), [("X", "a"), ("X", "b")])
        for r in rows:
            assert r.conditional == pytest.approx(r.baseline, abs=1e-12)
            assert r.interventional == pytest.approx(r.baseline, abs=1e-12)

    def test_target_as_subject_rejected(self, perception, fusion_fn):
        with pytest.raises(ValueError, match="target"):
            tornado(perception, fusion_fn, [("Fusion", "FN")])


class TestInfinityAndUndefined:
    def test_zero_denominator_is_infinity(self):
        # Y always fails unless X=b is forced; conditioning on X=b gives 0
        network = CausalNetwork(
            (Variable("X", ("a", "b")), Variable("Y", ("fail", "ok"))),
            (Cpt("X", (), ((0.5, 0.5),)),
             Cpt("Y", ("X",), ((1.0, 0.0), (0.0, 1.0)))))
        got = rrw(network, TargetEvent("Y", "fail"), "X", "b")
        assert math.isinf(got.value)
        assert not got.is_undefined

    def test_zero_over_zero_is_undefined(self):
        network = CausalNetwork(
            (Variable("X", ("a", "b")), Variable("Y", ("fail", "ok"))),
            (Cpt("X", (), ((0.5, 0.5),)),
             Cpt("Y", (), ((0.0, 1.0),))))
        got = rrw(network, TargetEvent("Y", "fail"), "X", "b")
        assert got.is_undefined

    def test_str_formats(self, perception, fusion_fn):
        value = rrw(perception, fusion_fn, "Occlusion", "none")
        assert "RRW[Occlusion" in str(value)


class TestProvenanceAudit:
    """Every ratio metric must recompute from its own stored queries."""

    def test_ratio_metrics_self_consistent(self, perception, fusion_fn, analysis_config):
        checks = []
        for name, roles in analysis_config.variables:
            checks.append(rrw(perception, fusion_fn, name, roles.reference))
            checks.append(rrw(perception, fusion_fn, name, roles.reference, INTERVENTIONAL))
            for state in perception.states(name):
                checks.append(rce_dichotomic(perception, fusion_fn, name, state))
                checks.append(rrw_dichotomic(perception, fusion_fn, name, state))
                checks.extend(ace_rce(perception, fusion_fn, name, state, roles.reference))
        for value in checks:
            if value.numerator is None or value.is_undefined:
                continue
            assert value.value == pytest.approx(
                value.numerator / value.denominator, abs=1e-15), str(value)

    def test_birnbaum_self_consistent(self, perception, fusion_fn):
        got = birnbaum_cbn(perception, fusion_fn, "Occlusion", "largely", 0.01)
        plus = got.query("P(Fusion=FN|+delta)")
        minus = got.query("P(Fusion=FN|-delta)")
        assert got.value == pytest.approx((plus - minus) / 0.02, abs=1e-15)
        # and the endpoint probabilities derive from the per-state conditionals
        obs = marginal(perception, "Occlusion")
        per_state = {s: got.query(f"P(Fusion=FN|Occlusion={s})")
                     for s in perception.states("Occlusion")}
        q = obs.as_dict()
        scale = (1 - q["largely"] - 0.01) / (1 - q["largely"])
        manual = (q["largely"] + 0.01) * per_state["largely"] \
            + q["partly"] * scale * per_state["partly"] \
            + q["none"] * scale * per_state["none"]
        assert plus == pytest.approx(manual, abs=1e-15)
