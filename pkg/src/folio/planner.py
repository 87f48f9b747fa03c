"""Design planning: resolve every open typographic attribute into a
settings record using a seeded stream constrained by the rule base.

Responsibilities:
    * the frozen draw order (page size, margins, grid, pairing and body
      size, alignment, paragraph mark, header layout, caption placement,
      features, cover color);
    * the body-size fitting loop against the characters-per-line window,
      with grid modification when the size clamps;
    * the page capacity check with its escalation path (size up, then
      margins, then an extra column);
    * settings file export/import.

Settings files pin every field on import. Two fields stay content-derived
on re-planning: the book type (recomputed from the manuscript) and the
language (taken from the manuscript front matter); pinned values for
those are carried along but never override the content.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from . import fonts
from .features import select_features
from .fonts import MM_PER_PT, PT_PER_MM
from .rules import BOOK_TYPES, FEATURE_NAMES, FontPairing, FontSlot, RuleSet
from .seeds import SeededStream

# title scale per heading level, relative to the body size
TITLE_SCALES = (2.4, 1.4, 1.0)
# one leading ratio for all title levels
TITLE_LEADING_RATIO = 1.125

# estimator guard bands, in characters: the fit loop aims inside the
# line-length limits so the realized median stays inside them. Ragged
# lines lose roughly half a word against the frequency estimate (the
# breaker never stretches to recover it), so their floor guard is wider;
# justified text is always hyphenated and packs past the estimate, so
# its ceiling guard is wider instead.
FIT_GUARD_FLOOR_JUSTIFIED = 3.0
FIT_GUARD_CEIL_JUSTIFIED = 7.0
FIT_GUARD_FLOOR_RAGGED = 7.5
FIT_GUARD_CEIL_RAGGED = 3.0
# plan to this fraction of the page word capacity
CAPACITY_SAFETY = 0.92

# running-text letter frequencies (including the space share) used only
# to estimate characters per line before any text is set
_EN_LETTERS = {
    "e": 12.70, "t": 9.06, "a": 8.17, "o": 7.51, "i": 6.97, "n": 6.75,
    "s": 6.33, "h": 6.09, "r": 5.99, "d": 4.25, "l": 4.03, "c": 2.78,
    "u": 2.76, "m": 2.41, "w": 2.36, "f": 2.23, "g": 2.02, "y": 1.97,
    "p": 1.93, "b": 1.49, "v": 0.98, "k": 0.77, "j": 0.15, "x": 0.15,
    "q": 0.10, "z": 0.07,
}
_PT_LETTERS = {
    "a": 14.63, "e": 12.57, "o": 10.73, "s": 7.81, "r": 6.53, "i": 6.18,
    "n": 5.05, "d": 4.99, "m": 4.74, "u": 4.63, "t": 4.34, "c": 3.88,
    "l": 2.78, "p": 2.52, "v": 1.67, "g": 1.30, "h": 1.28, "q": 1.20,
    "b": 1.04, "f": 1.02, "z": 0.47, "j": 0.40, "x": 0.25, "k": 0.02,
    "w": 0.01, "y": 0.01, "ã": 0.73, "ç": 0.53, "á": 0.47, "é": 0.45,
    "ê": 0.45, "ó": 0.30, "í": 0.13, "â": 0.06, "ô": 0.04, "õ": 0.04,
}
MEAN_WORD_LENGTH = {"en": 4.7, "pt": 4.9}
_SPACE_SHARE = {"en": 1.0 / 5.7, "pt": 1.0 / 5.9}
_LETTER_TABLES = {"en": _EN_LETTERS, "pt": _PT_LETTERS}


class PlanError(ValueError):
    pass


class FitError(PlanError):
    """No feasible (size, grid) combination within the rule ranges."""


@dataclass(frozen=True)
class TitleStyle:
    level: int
    size: float
    leading: float
    alignment: str


@dataclass(frozen=True)
class DesignSettings:
    seed: int
    book_type: str
    size_id: str
    orientation: str
    page_w: float
    page_h: float
    margins: dict          # top/inside/bottom/outside, mm
    columns: int
    gutter: float          # mm
    pairing: FontPairing
    body_size: float       # pt
    body_leading: float    # pt
    body_alignment: str
    hyphenation: bool
    paragraph_mark: str
    body_indent: float     # mm, signed; applied per the mark variant
    titles: tuple          # three TitleStyle records
    caption_placement: str  # belowLeft | asideRotated
    caption_size: float
    header_layout: str
    toc: bool
    colophon: bool
    features: tuple
    feature_color: tuple = None      # CMYK, set when any feature is on
    gradient_margins: str = None     # inner | outer | both
    cover_color: tuple = (0, 0, 0, 0)
    language: str = "en"
    space_before: float = 0.0        # pt; dropLines mark sets one leading
    space_after: float = 0.0

    @property
    def block_width(self) -> float:
        return self.page_w - self.margins["inside"] - self.margins["outside"]

    @property
    def block_height(self) -> float:
        return self.page_h - self.margins["top"] - self.margins["bottom"]

    @property
    def column_width(self) -> float:
        return (self.block_width - (self.columns - 1) * self.gutter) / self.columns

    @property
    def leading_ratio(self) -> float:
        return self.body_leading / self.body_size


@dataclass
class Constraints:
    """Optional pins for every drawn attribute. None means auto."""
    seed: int = None
    book_type: str = None
    page_w: float = None
    page_h: float = None
    margins: dict = None           # may pin a subset of sides
    columns: int = None
    gutter: float = None
    pairing: dict = None           # pairing record or {"id": ...}
    body_size: float = None
    body_leading: float = None
    body_alignment: str = None
    hyphenation: bool = None
    paragraph_mark: str = None
    body_indent: float = None
    titles: tuple = None
    caption_placement: str = None
    caption_size: float = None
    header_layout: str = None
    toc: bool = None
    colophon: bool = None
    features: tuple = None
    cover_color: tuple = None
    language: str = None
    surprise: bool = False
    style_mode: str = "generate"   # keep | map | generate


def validate_constraints(c: Constraints, rules: RuleSet) -> list:
    """Field-level range errors, empty when valid."""
    errors = []
    if c.margins:
        for side, value in c.margins.items():
            rng = rules.margins.get(side)
            if rng is None:
                errors.append(f"margins.{side}: unknown side")
            elif not rng.contains(value):
                errors.append(f"margins.{side}: {value} outside "
                              f"[{rng.min}, {rng.max}]")
    if c.body_size is not None and not rules.font_size.contains(c.body_size):
        errors.append(f"body.size: {c.body_size} outside "
                      f"[{rules.font_size.min}, {rules.font_size.max}]")
    if c.body_size and c.body_leading:
        ratio = c.body_leading / c.body_size
        if not rules.leading.contains(round(ratio, 4)):
            errors.append(f"body.leading: ratio {ratio:.3f} outside "
                          f"[{rules.leading.min}, {rules.leading.max}]")
    if c.body_alignment is not None and c.body_alignment not in ("justified", "left"):
        errors.append(f"body.alignment: unknown value {c.body_alignment!r}")
    if c.body_alignment == "justified" and c.hyphenation is False:
        errors.append("body.hyphenation: required when justified")
    if c.paragraph_mark is not None and c.paragraph_mark not in rules.paragraph_marks:
        errors.append(f"body.paragraphMark: unknown mark {c.paragraph_mark!r}")
    if c.header_layout is not None and rules.header_layout_by_id(c.header_layout) is None:
        errors.append(f"headerLayout: unknown id {c.header_layout!r}")
    if c.columns is not None and c.columns < 1:
        errors.append("grid.columns: must be at least 1")
    if c.gutter is not None and c.gutter != 0 and not rules.gutter.contains(c.gutter):
        errors.append(f"grid.gutter: {c.gutter} outside "
                      f"[{rules.gutter.min}, {rules.gutter.max}]")
    if c.page_w is not None and c.page_w <= 0:
        errors.append("page.w: must be positive")
    if c.page_h is not None and c.page_h <= 0:
        errors.append("page.h: must be positive")
    if c.caption_placement is not None and c.caption_placement not in (
            "belowLeft", "asideRotated"):
        errors.append(f"caption.placement: unknown value {c.caption_placement!r}")
    if c.features is not None:
        for name in c.features:
            if name not in FEATURE_NAMES:
                errors.append(f"features: unknown feature {name!r}")
    if c.cover_color is not None:
        if len(c.cover_color) != 4 or any(not (0 <= v <= 100) for v in c.cover_color):
            errors.append("coverColor: 4 components in [0, 100] required")
    if c.book_type is not None and c.book_type not in BOOK_TYPES:
        errors.append(f"bookType: unknown type {c.book_type!r}")
    return errors


def mean_advance_em(metrics: fonts.FontMetrics, language: str) -> float:
    """Frequency-weighted mean character advance for running text."""
    lang = language if language in _LETTER_TABLES else "en"
    table = _LETTER_TABLES[lang]
    space_share = _SPACE_SHARE[lang]
    letter_total = sum(table.values())
    mean = space_share * metrics.advance_em(" ")
    for ch, weight in table.items():
        mean += (1.0 - space_share) * (weight / letter_total) * metrics.advance_em(ch)
    return mean


def estimate_chars_per_line(column_width_mm: float, size: float,
                            metrics: fonts.FontMetrics, language: str) -> float:
    return (column_width_mm * PT_PER_MM) / (mean_advance_em(metrics, language) * size)


def compute_grid(page_w: float, margins: dict, rules: RuleSet,
                 stream: SeededStream, columns: int = None,
                 gutter: float = None):
    """Resolve (columns, gutter, column width). The drawn target column
    width divides the text block; small blocks get one column."""
    block = page_w - margins["inside"] - margins["outside"]
    if block <= 0:
        raise PlanError("margins leave no text block")
    if columns is None:
        target = stream.uniform(rules.column_width.min, rules.column_width.max)
        columns = max(1, int(block // target))
    if columns > 1:
        if gutter is None:
            gutter = round(stream.uniform(rules.gutter.min, rules.gutter.max), 1)
    else:
        gutter = 0.0
    width = (block - (columns - 1) * gutter) / columns
    if width <= 0:
        raise PlanError("gutter leaves no column width")
    return columns, gutter, width


def _derive_titles(body_size: float, alignment: str) -> tuple:
    titles = []
    for level, scale in enumerate(TITLE_SCALES, start=1):
        size = round(body_size * scale, 1)
        titles.append(TitleStyle(level=level, size=size,
                                 leading=round(size * TITLE_LEADING_RATIO, 2),
                                 alignment=alignment))
    return tuple(titles)


def _mark_indent(mark: str, body_size: float) -> float:
    """First-line indent in mm implied by the paragraph mark variant."""
    em_mm = body_size * MM_PER_PT
    if mark == "negativeIndent":
        return round(-em_mm, 1)
    if mark == "positiveIndent":
        return round(em_mm, 1)
    return 0.0


def plan(stats, rules: RuleSet, constraints: Constraints = None,
         seed: int = 0, stream: SeededStream = None,
         language: str = None) -> DesignSettings:
    """Resolve every attribute. Pinned constraint fields pass through
    untouched; everything else is drawn in the frozen order."""
    c = constraints or Constraints()
    errors = validate_constraints(c, rules)
    if errors:
        raise PlanError("; ".join(errors))
    if stream is None:
        stream = SeededStream(seed)
    book_type = stats.book_type
    lang = language or c.language or "en"

    # 1. page size
    if c.page_w is not None and c.page_h is not None:
        page_w, page_h = float(c.page_w), float(c.page_h)
        match = next((s for s in rules.sizes
                      if s.width == page_w and s.height == page_h), None)
        size_id = match.id if match else f"{page_w:g}x{page_h:g}"
        orientation = ("portrait" if page_h > page_w
                       else "square" if page_h == page_w else "landscape")
    else:
        weights = [s.weights.get(book_type, 0.0) for s in rules.sizes]
        option = stream.weighted_choice(list(rules.sizes), weights)
        page_w, page_h = option.width, option.height
        size_id, orientation = option.id, option.orientation

    # 2. margins
    margins = {}
    pinned_margins = c.margins or {}
    for side in ("top", "inside", "bottom", "outside"):
        if side in pinned_margins:
            margins[side] = float(pinned_margins[side])
        else:
            rng = rules.margins[side]
            margins[side] = round(stream.uniform(rng.min, rng.max), 1)

    # 3. grid
    columns, gutter, _ = compute_grid(page_w, margins, rules, stream,
                                      columns=c.columns, gutter=c.gutter)

    # 4. pairing and initial body size
    if c.pairing is not None:
        pairing = pairing_from_dict(c.pairing, rules)
    else:
        eligible = rules.pairings_for(book_type)
        if not eligible:
            raise PlanError(f"no pairing accepts book type {book_type}")
        pairing = stream.choice(eligible)
    if c.body_size is not None:
        body_size = float(c.body_size)
    else:
        steps = int((rules.font_size.max - rules.font_size.min) / 0.5)
        body_size = rules.font_size.min + 0.5 * stream.randint(0, steps)

    # 5. alignment (body, hyphenation, titles share one alignment draw)
    if c.body_alignment is not None:
        body_alignment = c.body_alignment
    else:
        body_alignment = stream.choice(rules.alignments["body"][book_type])
    if body_alignment == "justified":
        hyphenation = True
    elif c.hyphenation is not None:
        hyphenation = bool(c.hyphenation)
    else:
        hyphenation = stream.chance(0.5)
    if c.titles:
        title_alignment = c.titles[0]["alignment"] if isinstance(c.titles[0], dict) \
            else c.titles[0].alignment
    else:
        title_alignment = stream.choice(rules.alignments["titles"])

    # 6. paragraph mark
    if c.paragraph_mark is not None:
        mark = c.paragraph_mark
    else:
        mark = stream.choice(rules.paragraph_marks)
    indent = c.body_indent if c.body_indent is not None \
        else _mark_indent(mark, body_size)

    # 7. header layout
    if c.header_layout is not None:
        header_layout = c.header_layout
    else:
        header_layout = stream.choice(rules.header_layouts).id

    # 8. caption placement (aside needs a wide outer margin)
    if c.caption_placement is not None:
        caption_placement = c.caption_placement
    elif margins["outside"] >= 12.0:
        caption_placement = stream.choice(["belowLeft", "asideRotated"])
    else:
        caption_placement = "belowLeft"
    caption_size = c.caption_size if c.caption_size is not None \
        else max(6.0, body_size - 2.0)

    # 9. features (the features module owns the draw sequence)
    fs = select_features(c.features, c.surprise, stream, rules)
    feature_flags = fs.flags
    feature_color = fs.color
    gradient_margins = fs.gradient_margins

    # 10. cover color
    if c.cover_color is not None:
        cover_color = tuple(c.cover_color)
    else:
        cover_color = stream.choice(rules.cover_colors).cmyk

    body_leading = c.body_leading if c.body_leading is not None \
        else round(body_size * rules.leading.clamp(pairing.leading), 2)

    titles = _titles_from_constraints(c.titles) if c.titles else \
        _derive_titles(body_size, title_alignment)

    return DesignSettings(
        seed=stream.seed, book_type=book_type, size_id=size_id,
        orientation=orientation, page_w=page_w, page_h=page_h,
        margins=margins, columns=columns, gutter=gutter, pairing=pairing,
        body_size=body_size, body_leading=body_leading,
        body_alignment=body_alignment, hyphenation=hyphenation,
        paragraph_mark=mark, body_indent=indent, titles=titles,
        caption_placement=caption_placement, caption_size=caption_size,
        header_layout=header_layout,
        toc=bool(c.toc) if c.toc is not None else False,
        colophon=bool(c.colophon) if c.colophon is not None else False,
        features=feature_flags, feature_color=feature_color,
        gradient_margins=gradient_margins, cover_color=cover_color,
        language=lang,
        space_before=body_leading if mark == "dropLines" else 0.0,
    )


def _titles_from_constraints(titles) -> tuple:
    out = []
    for i, t in enumerate(titles):
        if isinstance(t, TitleStyle):
            out.append(t)
        else:
            out.append(TitleStyle(level=t.get("level", i + 1),
                                  size=float(t["size"]),
                                  leading=float(t["leading"]),
                                  alignment=t["alignment"]))
    return tuple(out)


def pairing_from_dict(data, rules: RuleSet) -> FontPairing:
    """Accept a pairing id from the rule base or a self-contained
    pairing record (settings files may carry custom pairings)."""
    if isinstance(data, FontPairing):
        return data
    if isinstance(data, str):
        found = rules.pairing_by_id(data)
        if found is None:
            raise PlanError(f"pairing: unknown id {data!r}")
        return found
    if set(data) == {"id"} or (data.get("id") and "title" not in data):
        found = rules.pairing_by_id(data["id"])
        if found is None:
            raise PlanError(f"pairing: unknown id {data['id']!r}")
        return found
    try:
        return FontPairing(
            id=data["id"],
            title=FontSlot(data["title"]["family"], data["title"].get("weight", "bold")),
            body=FontSlot(data["body"]["family"], data["body"].get("weight", "regular")),
            leading=float(data["leading"]),
            book_types=tuple(data.get("bookTypes", BOOK_TYPES)),
            body_class=data.get("bodyClass", "serif"),
        )
    except KeyError as exc:
        raise PlanError(f"pairing: missing field {exc}") from exc


# -- body size fitting -----------------------------------------------------


def _char_window(settings: DesignSettings, rules: RuleSet):
    ll = rules.line_length
    if settings.body_alignment == "justified":
        lo = ll["justifiedMin"] + FIT_GUARD_FLOOR_JUSTIFIED
        hi = ll["max"] - FIT_GUARD_CEIL_JUSTIFIED
    else:
        lo = ll["min"] + FIT_GUARD_FLOOR_RAGGED
        hi = ll["max"] - FIT_GUARD_CEIL_RAGGED
    return lo, hi


def _fit_size_for_column(column_mm: float, start: float, settings, rules,
                         metrics, language: str):
    """Step the size by 0.5 pt until the estimate enters the window.
    Returns (size, estimate, ok)."""
    lo, hi = _char_window(settings, rules)
    size = start
    est = estimate_chars_per_line(column_mm, size, metrics, language)
    while est < lo and size - 0.5 >= rules.font_size.min:
        size = round(size - 0.5, 1)
        est = estimate_chars_per_line(column_mm, size, metrics, language)
    while est > hi and size + 0.5 <= rules.font_size.max:
        size = round(size + 0.5, 1)
        est = estimate_chars_per_line(column_mm, size, metrics, language)
    return size, est, lo <= est <= hi


def _estimated_words_per_page(settings: DesignSettings, est_chars: float) -> float:
    word_len = MEAN_WORD_LENGTH.get(settings.language, MEAN_WORD_LENGTH["en"])
    lines = int((settings.block_height * PT_PER_MM) // settings.body_leading)
    words_per_line = est_chars / (word_len + 1.0)
    return settings.columns * lines * words_per_line


def fit_body_size(settings: DesignSettings, metrics: fonts.FontMetrics,
                  rules: RuleSet) -> DesignSettings:
    """Fit the body size so the estimated characters per line sit inside
    the line-length window, modifying the grid when the size clamps, then
    check the page word capacity, escalating size, margins and columns.
    Draws nothing; deterministic in its inputs. Idempotent."""
    s = settings
    language = s.language

    for attempt in range(64):
        size, est, ok = _fit_size_for_column(s.column_width, s.body_size,
                                             s, rules, metrics, language)
        if ok:
            s = _apply_size(s, size, rules)
            break
        # grid modification: columns when they can reach the window,
        # margins otherwise, 1 mm at a time
        lo, hi = _char_window(s, rules)
        if est < lo:
            changed = _widen_column(s, rules, metrics)
        else:
            changed = _narrow_column(s, rules, metrics)
        if changed is None:
            raise FitError(
                f"no feasible size and grid: estimate {est:.1f} chars "
                f"outside [{lo:.0f}, {hi:.0f}] at every allowed size")
        s = changed
    else:
        raise FitError("size fitting did not converge")

    s = _fit_capacity(s, metrics, rules)
    return s


def _apply_size(s: DesignSettings, size: float, rules: RuleSet) -> DesignSettings:
    leading = round(size * rules.leading.clamp(s.pairing.leading), 2)
    titles = _derive_titles(size, s.titles[0].alignment if s.titles else "left")
    return replace(s, body_size=size, body_leading=leading, titles=titles,
                   body_indent=_mark_indent(s.paragraph_mark, size),
                   caption_size=max(6.0, size - 2.0),
                   space_before=leading if s.paragraph_mark == "dropLines" else 0.0)


def _window_feasible(width_mm: float, s: DesignSettings, rules: RuleSet,
                     metrics) -> bool:
    """Some allowed size puts the estimate inside the window for this
    column width. The window is wider than one 0.5 pt step's worth of
    characters, so continuous overlap implies a grid solution."""
    lo, hi = _char_window(s, rules)
    ma = mean_advance_em(metrics, s.language)
    est_at_max = (width_mm * PT_PER_MM) / (ma * rules.font_size.max)
    est_at_min = (width_mm * PT_PER_MM) / (ma * rules.font_size.min)
    return est_at_max <= hi and est_at_min >= lo


def _widen_column(s: DesignSettings, rules: RuleSet, metrics):
    """More characters needed: drop a column when the wider column can
    reach the window, else pull the horizontal margins in 1 mm at a
    time, with the column drop as a last resort."""
    dropped = None
    if s.columns > 1:
        new_cols = s.columns - 1
        gutter = s.gutter if new_cols > 1 else 0.0
        width = (s.block_width - (new_cols - 1) * gutter) / new_cols
        dropped = replace(s, columns=new_cols, gutter=gutter)
        if _window_feasible(width, s, rules, metrics):
            return dropped
    margins = dict(s.margins)
    moved = False
    for side in ("inside", "outside"):
        if margins[side] - 1.0 >= rules.margins[side].min:
            margins[side] = round(margins[side] - 1.0, 1)
            moved = True
    if moved:
        return replace(s, margins=margins)
    return dropped


def _narrow_column(s: DesignSettings, rules: RuleSet, metrics):
    """Fewer characters needed: add a column when the narrower column
    can still reach the window, else push the horizontal margins out,
    with the column add as a last resort."""
    gutter = s.gutter if s.gutter else rules.gutter.min
    new_cols = s.columns + 1
    width = (s.block_width - (new_cols - 1) * gutter) / new_cols
    added = None
    if width * PT_PER_MM >= rules.line_length["min"] * 0.4 * rules.font_size.min:
        added = replace(s, columns=new_cols, gutter=gutter)
        if _window_feasible(width, s, rules, metrics):
            return added
    margins = dict(s.margins)
    moved = False
    for side in ("inside", "outside"):
        if margins[side] + 1.0 <= rules.margins[side].max:
            margins[side] = round(margins[side] + 1.0, 1)
            moved = True
    if moved:
        return replace(s, margins=margins)
    return added


def _capacity_budget(columns: int, rules: RuleSet) -> float:
    key = "oneColumn" if columns == 1 else "multiColumn"
    return rules.page_capacity[key] * CAPACITY_SAFETY


def _grow_vertical(s: DesignSettings, est: float, rules: RuleSet):
    """Widen top/bottom margins in 1 mm steps until the word estimate
    meets the budget; margins dict, or None when even the widest fail."""
    budget = _capacity_budget(s.columns, rules)
    margins = dict(s.margins)
    for _ in range(64):
        trial = replace(s, margins=margins)
        if _estimated_words_per_page(trial, est) <= budget:
            return margins
        moved = False
        for side in ("top", "bottom"):
            if margins[side] + 1.0 <= rules.margins[side].max:
                margins[side] = round(margins[side] + 1.0, 1)
                moved = True
        if not moved:
            return None
    return None


def _inout_for_column(s: DesignSettings, col_target_mm: float,
                      rules: RuleSet):
    """Horizontal margins that realize the target column width, keeping
    the current inside:outside proportion; None when out of range."""
    needed = s.page_w - (s.columns * col_target_mm
                         + (s.columns - 1) * s.gutter)
    rin, rout = rules.margins["inside"], rules.margins["outside"]
    # an unreachable target clamps to the nearest feasible sum; the
    # caller re-checks the resulting character estimate
    needed = min(max(needed, rin.min + rout.min), rin.max + rout.max)
    cur_in, cur_out = s.margins["inside"], s.margins["outside"]
    share = cur_in / (cur_in + cur_out) if cur_in + cur_out else 0.5
    inside = rin.clamp(round(needed * share, 1))
    outside = round(needed - inside, 1)
    if not rout.contains(outside):
        outside = rout.clamp(outside)
        inside = round(needed - outside, 1)
        if not rin.contains(inside):
            return None
    margins = dict(s.margins)
    margins["inside"], margins["outside"] = inside, outside
    return margins


def _fit_capacity(s: DesignSettings, metrics, rules: RuleSet) -> DesignSettings:
    """Keep the estimated words per page under the capacity cap.

    Deterministic, draw-free search: raise the size in 0.5 pt steps
    (bigger type means fewer words), at each size trying the current
    column first and then re-tuning the horizontal margins toward the
    low end of the character window; vertical margins widen last. When
    no size works, add a column (the multi-column cap applies) and
    repeat. The character window stays satisfied throughout.
    """
    est = estimate_chars_per_line(s.column_width, s.body_size,
                                  metrics, s.language)
    if _estimated_words_per_page(s, est) <= _capacity_budget(s.columns, rules):
        return s

    mean = mean_advance_em(metrics, s.language)

    def try_columns(base: DesignSettings):
        lo, hi = _char_window(base, rules)
        size = base.body_size
        while size <= rules.font_size.max + 1e-9:
            sized = _apply_size(base, round(size, 1), rules)
            # keep the current column when the estimate still fits
            est_here = estimate_chars_per_line(sized.column_width,
                                               sized.body_size, metrics,
                                               sized.language)
            if lo <= est_here <= hi:
                margins = _grow_vertical(sized, est_here, rules)
                if margins is not None:
                    return replace(sized, margins=margins)
            # re-tune inside/outside for the narrowest window column
            col_target = lo * mean * sized.body_size * MM_PER_PT
            margins = _inout_for_column(sized, col_target, rules)
            if margins is not None:
                trial = replace(sized, margins=margins)
                est_t = estimate_chars_per_line(trial.column_width,
                                                trial.body_size, metrics,
                                                trial.language)
                if lo <= est_t <= hi:
                    grown = _grow_vertical(trial, est_t, rules)
                    if grown is not None:
                        return replace(trial, margins=grown)
            size += 0.5
        return None

    fitted = try_columns(s)
    if fitted is not None:
        return fitted

    # one more column: the multi-column capacity applies
    gutter = s.gutter if s.gutter else rules.gutter.min
    wider = replace(s, columns=s.columns + 1, gutter=gutter)
    trial_size, trial_est, ok = _fit_size_for_column(
        wider.column_width, rules.font_size.min, wider, rules, metrics,
        s.language)
    if ok:
        wider = _apply_size(wider, trial_size, rules)
        if _estimated_words_per_page(
                wider, trial_est) <= _capacity_budget(wider.columns, rules):
            return wider
        fitted = try_columns(wider)
        if fitted is not None:
            return fitted

    # fewer columns: bigger type on one wide column carries the fewest
    # words per page, at the lower one-column cap
    for cols in range(s.columns - 1, 0, -1):
        narrower = replace(s, columns=cols,
                           gutter=s.gutter if cols > 1 else 0.0)
        fitted = try_columns(narrower)
        if fitted is not None:
            return fitted
    raise FitError("page capacity cannot be met within the rule ranges")


# -- settings files --------------------------------------------------------


def settings_to_dict(s: DesignSettings) -> dict:
    return {
        "seed": s.seed,
        "bookType": s.book_type,
        "page": {"w": s.page_w, "h": s.page_h},
        "margins": {"top": s.margins["top"], "inside": s.margins["inside"],
                     "bottom": s.margins["bottom"],
                     "outside": s.margins["outside"]},
        "grid": {"columns": s.columns, "gutter": s.gutter},
        "pairing": {
            "id": s.pairing.id,
            "title": {"family": s.pairing.title.family,
                       "weight": s.pairing.title.weight},
            "body": {"family": s.pairing.body.family,
                      "weight": s.pairing.body.weight},
            "leading": s.pairing.leading,
            "bookTypes": list(s.pairing.book_types),
            "bodyClass": s.pairing.body_class,
        },
        "body": {"size": s.body_size, "leading": s.body_leading,
                  "alignment": s.body_alignment, "hyphenation": s.hyphenation,
                  "paragraphMark": s.paragraph_mark, "indent": s.body_indent},
        "titles": [{"level": t.level, "size": t.size, "leading": t.leading,
                     "alignment": t.alignment} for t in s.titles],
        "caption": {"placement": s.caption_placement, "size": s.caption_size},
        "headerLayout": s.header_layout,
        "toc": s.toc,
        "colophon": s.colophon,
        "features": list(s.features),
        "coverColor": list(s.cover_color),
        "language": s.language,
    }


def export_settings(s: DesignSettings) -> str:
    """Deterministic settings file text (stable key order)."""
    return json.dumps(settings_to_dict(s), indent=2, ensure_ascii=False) + "\n"


_SETTINGS_KEYS = ("seed", "bookType", "page", "margins", "grid", "pairing",
                  "body", "titles", "caption", "headerLayout", "toc",
                  "colophon", "features", "coverColor", "language")


def import_settings(text: str, rules: RuleSet) -> Constraints:
    """Parse a settings file into fully pinned constraints, validating
    every field against the rule ranges."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"settings file does not parse: {exc}") from exc
    if not isinstance(data, dict) or not data:
        raise PlanError("settings file has no fields")
    unknown = set(data) - set(_SETTINGS_KEYS)
    if unknown:
        raise PlanError(f"settings file has unknown keys: {sorted(unknown)}")

    c = Constraints()
    if "seed" in data:
        c.seed = int(data["seed"])
    if "bookType" in data:
        c.book_type = data["bookType"]
    if "page" in data:
        c.page_w = float(data["page"]["w"])
        c.page_h = float(data["page"]["h"])
    if "margins" in data:
        c.margins = {k: float(v) for k, v in data["margins"].items()}
    if "grid" in data:
        c.columns = int(data["grid"]["columns"])
        c.gutter = float(data["grid"].get("gutter", 0.0))
    if "pairing" in data:
        c.pairing = data["pairing"]
    if "body" in data:
        b = data["body"]
        c.body_size = float(b["size"])
        c.body_leading = float(b["leading"])
        c.body_alignment = b["alignment"]
        c.hyphenation = bool(b["hyphenation"])
        c.paragraph_mark = b.get("paragraphMark")
        c.body_indent = float(b.get("indent", 0.0))
    if "titles" in data:
        c.titles = tuple(data["titles"])
    if "caption" in data:
        c.caption_placement = data["caption"]["placement"]
        c.caption_size = float(data["caption"]["size"])
    if "headerLayout" in data:
        c.header_layout = data["headerLayout"]
    if "toc" in data:
        c.toc = bool(data["toc"])
    if "colophon" in data:
        c.colophon = bool(data["colophon"])
    if "features" in data:
        c.features = tuple(data["features"])
    if "coverColor" in data:
        c.cover_color = tuple(data["coverColor"])
    if "language" in data:
        c.language = data["language"]

    errors = validate_constraints(c, rules)
    if errors:
        raise PlanError("; ".join(errors))
    return c
