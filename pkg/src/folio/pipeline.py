"""One-call orchestration of the generation steps.

A single seeded stream is threaded through the whole flow: the planner
draws the design, the paginator draws its in-flow decisions (image
spans, random indents), the cover only draws when something was left
unresolved. Same manuscript, same rules, same seed: same book,
byte for byte.

When the body size arrives pinned (imported settings, regeneration),
the size-fitting pass is skipped entirely: the design is taken as
given and the capacity checks at pagination keep it honest. Fitting
would overwrite the pinned value, which is exactly what a settings
file is meant to prevent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import fonts
from .cover import design_cover, extract_title
from .features import apply_features, feature_set_from_settings
from .ingest import Heading, Manuscript, classify
from .paginate import LayoutDocument, paginate
from .planner import Constraints, fit_body_size, plan
from .rules import RuleSet
from .seeds import SeededStream


@dataclass
class GenerationResult:
    settings: object
    document: LayoutDocument
    title: str
    author: str
    warnings: list = field(default_factory=list)

    @property
    def page_count(self) -> int:
        return len(self.document.pages)


def generate(ms: Manuscript, rules: RuleSet, seed: int = 0,
             constraints: Constraints = None,
             language: str = None) -> GenerationResult:
    """Run plan, fit, paginate, features and cover for one manuscript."""
    warnings = []
    stats = classify(ms, rules)
    stream = SeededStream(seed)
    settings = plan(stats, rules, constraints=constraints, stream=stream,
                    language=language)

    pinned_size = constraints is not None \
        and constraints.body_size is not None
    if not pinned_size:
        metrics = fonts.metrics_for(settings.pairing.body.family,
                                    settings.pairing.body.weight)
        settings = fit_body_size(settings, metrics, rules)

    if settings.toc and not any(isinstance(b, Heading) for b in ms.blocks):
        warnings.append("toc requested but the manuscript has no headings")

    doc = paginate(ms, settings, rules, stream=stream)
    fs = feature_set_from_settings(settings)
    doc = apply_features(doc, fs, stream)

    info = extract_title(ms)
    if info.source == "fallback-extraction":
        warnings.append("no front matter; cover title extracted from "
                        "the text")
    doc.cover_front, doc.cover_back = design_cover(info, settings, stream,
                                                   rules)
    return GenerationResult(settings=settings, document=doc,
                            title=info.title, author=info.author,
                            warnings=warnings)
