"""Design fingerprints, diversity, and coherence."""

from dataclasses import replace

import pytest

from folio.evaluate import (AttributeVector, CATEGORICAL_SLOTS,
                            NUMERIC_SLOTS, SLOT_ORDER, attribute_vector,
                            coherence_report, diversity_score)
from folio.ingest import classify, parse_manuscript
from folio.planner import plan

from corpus import manuscript_source
from test_paginate import planned, pins


def vec(**over):
    base = dict(size_id="a5", orientation="portrait", pairing_id="p",
                body_alignment="justified", header_layout="topLeft",
                paragraph_mark="ornament", caption_placement="belowLeft",
                features=(), margins=0.5, columns=0.0, body_size=0.5,
                leading_ratio=0.5)
    base.update(over)
    return AttributeVector(**base)


def test_twelve_slots_eight_categorical_four_numeric():
    assert len(SLOT_ORDER) == 12
    assert len(CATEGORICAL_SLOTS) == 8
    assert len(NUMERIC_SLOTS) == 4
    assert set(SLOT_ORDER) == set(CATEGORICAL_SLOTS) | set(NUMERIC_SLOTS)


def test_vector_from_fitted_settings(rules):
    src = manuscript_source(7, 800)
    _, s = planned(rules, src, **pins())
    v = attribute_vector(s, rules)
    assert v.size_id == s.size_id
    assert v.pairing_id == "gt-walsheim-adobe-caslon"
    assert v.body_alignment == "justified"
    assert v.features == ()
    # numeric slots normalized against the rule ranges
    mean = (12.0 + 12.0 + 13.7 + 22.0) / 4.0
    mlo = sum(rules.margins[k].min for k in
              ("top", "inside", "bottom", "outside")) / 4.0
    mhi = sum(rules.margins[k].max for k in
              ("top", "inside", "bottom", "outside")) / 4.0
    assert v.margins == pytest.approx((mean - mlo) / (mhi - mlo))
    assert v.columns == 0.0
    assert v.body_size == pytest.approx(
        (10.0 - rules.font_size.min)
        / (rules.font_size.max - rules.font_size.min))
    assert v.leading_ratio == pytest.approx(
        (1.3 - rules.leading.min) / (rules.leading.max - rules.leading.min))


def test_numeric_slots_stay_in_unit_interval(rules):
    for seed in range(40):
        src = manuscript_source(seed, 600)
        stats = classify(parse_manuscript(src))
        s = plan(stats, rules, seed=seed)
        v = attribute_vector(s, rules)
        for name in NUMERIC_SLOTS:
            assert 0.0 <= v.slot(name) <= 1.0


def test_identical_vectors_score_zero_diversity():
    vs = [vec(), vec(), vec()]
    assert diversity_score(vs) == 0.0
    report = coherence_report(vs)
    assert report.coherence == 1.0
    assert report.diversity == 0.0
    assert all(state == "shared" for state in report.slots.values())
    assert report.shared_slots == SLOT_ORDER


def test_single_categorical_difference_is_one_twelfth():
    vs = [vec(), vec(pairing_id="q")]
    assert diversity_score(vs) == pytest.approx(1.0 / 12.0)
    report = coherence_report(vs)
    assert report.slots["pairingId"] == "differing"
    assert report.coherence == pytest.approx(11.0 / 12.0)
    assert "pairingId" not in report.shared_slots


def test_numeric_difference_scores_absolute_delta():
    vs = [vec(body_size=0.25), vec(body_size=0.5)]
    assert diversity_score(vs) == pytest.approx(0.25 / 12.0)
    assert coherence_report(vs).slots["bodySize"] == "differing"


def test_feature_tuples_compare_as_wholes():
    vs = [vec(features=("marginGradient",)),
          vec(features=("marginGradient", "randomIndent"))]
    assert diversity_score(vs) == pytest.approx(1.0 / 12.0)


def test_all_slots_different_scores_one():
    a = vec()
    b = AttributeVector(size_id="b6", orientation="landscape",
                        pairing_id="z", body_alignment="left",
                        header_layout="bottomCentre",
                        paragraph_mark="pilcrow",
                        caption_placement="asideRotated",
                        features=("randomIndent",), margins=1.0,
                        columns=1.0, body_size=1.0, leading_ratio=1.0)
    # numeric deltas: margins 0.5, columns 1.0, size 0.5, leading 0.5
    assert diversity_score([a, b]) == pytest.approx(10.5 / 12.0)


def test_mean_over_all_pairs():
    vs = [vec(), vec(), vec(pairing_id="q")]
    # pairs: (0,1) 0, (0,2) 1/12, (1,2) 1/12
    assert diversity_score(vs) == pytest.approx((2.0 / 12.0) / 3.0)


def test_too_few_vectors_rejected():
    with pytest.raises(ValueError):
        diversity_score([vec()])
    with pytest.raises(ValueError):
        coherence_report([vec()])


def test_independent_seeds_vary_regenerated_do_not(rules):
    stats = classify(parse_manuscript(manuscript_source(5, 700)))
    fresh = [attribute_vector(plan(stats, rules, seed=seed), rules)
             for seed in range(10, 22)]
    regen = [attribute_vector(plan(stats, rules, seed=33), rules)
             for _ in range(12)]
    assert diversity_score(fresh) > 0.15
    assert diversity_score(regen) == 0.0
    assert coherence_report(regen).coherence == 1.0
