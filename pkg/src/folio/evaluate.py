"""Diversity and coherence metrics over sets of designs.

Each design reduces to a fixed 12-slot fingerprint: eight categorical
slots (page size, orientation, pairing, body alignment, header layout,
paragraph mark, caption placement, feature flags) and four numeric slots
normalized to [0, 1] against the rule base ranges (mean margin, column
count, body size, leading ratio). Diversity is the mean pairwise
distance, slot distances being 0/1 for categorical mismatch and absolute
difference for numeric; coherence is its complement, with a per-slot
shared/differing listing.

The score stands in for the paper-style human survey: the claim to test
is an ordering (books from independent seeds score higher than books
regenerated from one settings file), not an absolute threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rules import RuleSet

CATEGORICAL_SLOTS = ("sizeId", "orientation", "pairingId", "bodyAlignment",
                     "headerLayout", "paragraphMark", "captionPlacement",
                     "features")
NUMERIC_SLOTS = ("margins", "columns", "bodySize", "leadingRatio")
SLOT_ORDER = CATEGORICAL_SLOTS + NUMERIC_SLOTS


@dataclass(frozen=True)
class AttributeVector:
    size_id: str
    orientation: str
    pairing_id: str
    body_alignment: str
    header_layout: str
    paragraph_mark: str
    caption_placement: str
    features: tuple
    margins: float
    columns: float
    body_size: float
    leading_ratio: float

    def slot(self, name: str):
        return {
            "sizeId": self.size_id,
            "orientation": self.orientation,
            "pairingId": self.pairing_id,
            "bodyAlignment": self.body_alignment,
            "headerLayout": self.header_layout,
            "paragraphMark": self.paragraph_mark,
            "captionPlacement": self.caption_placement,
            "features": self.features,
            "margins": self.margins,
            "columns": self.columns,
            "bodySize": self.body_size,
            "leadingRatio": self.leading_ratio,
        }[name]


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _max_columns(rules: RuleSet) -> int:
    """Ceiling implied by the rule base: the widest page filled with the
    narrowest legal columns at the smallest gutter and margins."""
    widest = max(max(s.width, s.height) for s in rules.sizes)
    min_margins = rules.margins["inside"].min + rules.margins["outside"].min
    usable = widest - min_margins + rules.gutter.min
    per = rules.column_width.min + rules.gutter.min
    return max(1, int(usable // per))


def attribute_vector(settings, rules: RuleSet) -> AttributeVector:
    m = settings.margins
    mlo = sum(rules.margins[k].min for k in
              ("top", "inside", "bottom", "outside")) / 4.0
    mhi = sum(rules.margins[k].max for k in
              ("top", "inside", "bottom", "outside")) / 4.0
    mean = (m["top"] + m["inside"] + m["bottom"] + m["outside"]) / 4.0
    max_cols = _max_columns(rules)
    fs = rules.font_size
    ld = rules.leading
    ratio = settings.body_leading / settings.body_size
    return AttributeVector(
        size_id=settings.size_id,
        orientation=settings.orientation,
        pairing_id=settings.pairing.id,
        body_alignment=settings.body_alignment,
        header_layout=settings.header_layout,
        paragraph_mark=settings.paragraph_mark,
        caption_placement=settings.caption_placement,
        features=tuple(settings.features),
        margins=_clamp01((mean - mlo) / (mhi - mlo)),
        columns=_clamp01((settings.columns - 1) / max(1, max_cols - 1)),
        body_size=_clamp01((settings.body_size - fs.min)
                           / (fs.max - fs.min)),
        leading_ratio=_clamp01((ratio - ld.min) / (ld.max - ld.min)),
    )


def _pair_distance(a: AttributeVector, b: AttributeVector) -> float:
    total = 0.0
    for name in CATEGORICAL_SLOTS:
        total += 0.0 if a.slot(name) == b.slot(name) else 1.0
    for name in NUMERIC_SLOTS:
        total += min(1.0, abs(a.slot(name) - b.slot(name)))
    return total / len(SLOT_ORDER)


def diversity_score(vectors) -> float:
    """Mean pairwise distance over all unordered pairs, in [0, 1]."""
    vs = list(vectors)
    if len(vs) < 2:
        raise ValueError("diversity needs at least 2 vectors")
    total = 0.0
    pairs = 0
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            total += _pair_distance(vs[i], vs[j])
            pairs += 1
    return total / pairs


@dataclass(frozen=True)
class CoherenceReport:
    slots: dict                  # slot name -> "shared" | "differing"
    coherence: float
    diversity: float

    @property
    def shared_slots(self) -> tuple:
        return tuple(n for n in SLOT_ORDER if self.slots[n] == "shared")


def coherence_report(vectors) -> CoherenceReport:
    vs = list(vectors)
    if len(vs) < 2:
        raise ValueError("coherence needs at least 2 vectors")
    slots = {}
    for name in SLOT_ORDER:
        first = vs[0].slot(name)
        if name in NUMERIC_SLOTS:
            same = all(math.isclose(v.slot(name), first, abs_tol=1e-9)
                       for v in vs[1:])
        else:
            same = all(v.slot(name) == first for v in vs[1:])
        slots[name] = "shared" if same else "differing"
    d = diversity_score(vs)
    return CoherenceReport(slots=slots, coherence=1.0 - d, diversity=d)
