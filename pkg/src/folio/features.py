"""Optional experimental page features.

Four switchable treatments ride on top of a finished layout: a color
background over the outer half of every page, a color-to-white gradient
along the inner and/or outer margins, a random first-line indent per
paragraph, and a maximized cover title. Selection happens before
pagination (explicitly, or by independent coin flips under "surprise");
the shared feature color is drawn from the cover palette the moment the
first feature is enabled.

Only the two painted features act here. The random indent has to perturb
line breaking, so the paginator consumes that flag itself, and the cover
module consumes the title flag; ``apply_features`` adds decorative
frames and must leave every content frame untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .paginate import Frame, LayoutDocument, Page
from .rules import FEATURE_NAMES, RuleSet
from .seeds import SeededStream

WHITE_CMYK = (0, 0, 0, 0)

# gradient margin choices, drawn when the gradient feature lands
GRADIENT_MARGINS = ("inner", "outer", "both")


@dataclass(frozen=True)
class FeatureSet:
    """Resolved feature switches plus their drawn parameters.

    ``color`` is set as soon as any feature is on; ``gradient_margins``
    is set exactly when the gradient is on.
    """

    half_page_background: bool = False
    margin_gradient: bool = False
    random_indent: bool = False
    max_cover_title: bool = False
    color: tuple = None
    gradient_margins: str = None

    @property
    def flags(self) -> tuple:
        """Enabled feature names in canonical order."""
        on = {
            "halfPageBackground": self.half_page_background,
            "marginGradient": self.margin_gradient,
            "randomIndent": self.random_indent,
            "maxCoverTitle": self.max_cover_title,
        }
        return tuple(name for name in FEATURE_NAMES if on[name])

    def __bool__(self) -> bool:
        return bool(self.flags)


def _from_flags(flags, color, gradient_margins) -> FeatureSet:
    names = set(flags)
    return FeatureSet(
        half_page_background="halfPageBackground" in names,
        margin_gradient="marginGradient" in names,
        random_indent="randomIndent" in names,
        max_cover_title="maxCoverTitle" in names,
        color=tuple(color) if color is not None else None,
        gradient_margins=gradient_margins,
    )


def select_features(explicit, surprise: bool, stream: SeededStream,
                    rules: RuleSet) -> FeatureSet:
    """Resolve the feature switches and draw their parameters.

    Explicit flags pass through untouched; otherwise, under surprise,
    each feature is enabled independently with the rule base's feature
    probability. The draw order is fixed: coin flips in canonical name
    order, then the shared color, then the gradient's margin choice.
    """
    if explicit is not None:
        flags = tuple(n for n in FEATURE_NAMES if n in set(explicit))
    elif surprise:
        flags = tuple(n for n in FEATURE_NAMES
                      if stream.chance(rules.feature_probability))
    else:
        flags = ()

    color = None
    gradient_margins = None
    if flags:
        color = stream.choice(rules.cover_colors).cmyk
        if "marginGradient" in flags:
            gradient_margins = stream.choice(list(GRADIENT_MARGINS))
    return _from_flags(flags, color, gradient_margins)


def feature_set_from_settings(settings) -> FeatureSet:
    """Rebuild the resolved set from exported design settings."""
    return _from_flags(settings.features, settings.feature_color,
                       settings.gradient_margins)


def _half_background(page: Page, s, color) -> Frame:
    # outer half: away from the spine, so left on a verso
    half = s.page_w / 2.0
    x = half if page.side == "recto" else 0.0
    return Frame(kind="decor", layer="background", x=x, y=0.0,
                 w=half, h=s.page_h, role="halfBackground",
                 color=tuple(color))


def _margin_gradient(page: Page, s, color, which: str) -> Frame:
    """Gradient strip over one margin, feature color at the page edge
    fading to white at the text block edge."""
    if which == "inner":
        width = s.margins["inside"]
        at_left = page.side == "recto"   # spine on the left of a recto
    else:
        width = s.margins["outside"]
        at_left = page.side == "verso"
    x = 0.0 if at_left else s.page_w - width
    # SVG-style unit vector: color sits at (x1, y1), white at (x2, y2)
    if at_left:
        axis = {"x1": 0.0, "y1": 0.0, "x2": 1.0, "y2": 0.0}
    else:
        axis = {"x1": 1.0, "y1": 0.0, "x2": 0.0, "y2": 0.0}
    return Frame(kind="decor", layer="background", x=x, y=0.0,
                 w=width, h=s.page_h, role=f"{which}MarginGradient",
                 gradient={"start": list(color), "end": list(WHITE_CMYK),
                           **axis})


def apply_features(doc: LayoutDocument, fs: FeatureSet,
                   stream: SeededStream = None) -> LayoutDocument:
    """Add the decorative feature layers to a paginated document.

    Returns a new document whose pages carry the decor frames on the
    background layer, beneath the untouched content frames. An empty
    set returns the input document unchanged. The random indent and
    the cover title are consumed elsewhere (paginator and cover
    respectively), so this pass draws nothing from the stream.
    """
    paint_half = fs.half_page_background
    paint_gradient = fs.margin_gradient
    if not (paint_half or paint_gradient):
        return doc

    sides = []
    if paint_gradient:
        sides = ["inner", "outer"] if fs.gradient_margins == "both" \
            else [fs.gradient_margins]

    s = doc.settings
    pages = []
    for page in doc.pages:
        decor = []
        if paint_half:
            decor.append(_half_background(page, s, fs.color))
        for which in sides:
            decor.append(_margin_gradient(page, s, fs.color, which))
        pages.append(Page(index=page.index, side=page.side, kind=page.kind,
                          number=page.number, frames=decor + page.frames))
    return LayoutDocument(settings=doc.settings, pages=pages,
                          title=doc.title, author=doc.author,
                          language=doc.language,
                          cover_front=doc.cover_front,
                          cover_back=doc.cover_back)
