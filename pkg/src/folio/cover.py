"""Front and back cover composition.

The front cover is purely typographic: the title in uppercase hanging
from the top margin, the author in uppercase sitting on the bottom
margin, both in the design's body face, over the cover color. The back
cover carries a short attribution block describing the system that made
the book. An experimental feature swaps the title for its maximal-size
variant: one word per line, sized so the widest word just fills the
text block width.

When the manuscript has no front matter, the title falls back to the
first sentence of the most prominent heading, or of the first paragraph
when there are no headings at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linebreak
from .fonts import MM_PER_PT, PT_PER_MM, measure_run, metrics_for
from .ingest import Heading, Manuscript, Paragraph
from .linebreak import BreakStyle
from .ingest import Run
from .paginate import Frame, Page, PlacedLine
from .rules import RuleSet
from .seeds import SeededStream

SENTENCE_ENDS = ".!?"

# default search range for the maximal title, pt
MAX_TITLE_BOUNDS = (8.0, 400.0)


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class TitleInfo:
    title: str
    author: str = ""
    source: str = "front-matter"   # front-matter | fallback-extraction


@dataclass(frozen=True)
class MaxTitleResult:
    size: float
    overflow: bool = False


def _first_sentence(text: str) -> str:
    text = text.strip()
    for i, ch in enumerate(text):
        if ch in SENTENCE_ENDS:
            return text[: i + 1]
    return text


def extract_title(ms: Manuscript) -> TitleInfo:
    """Front-matter title when present, else the first sentence of the
    most prominent heading (first in document order on ties), else the
    first sentence of the first paragraph."""
    if ms.title:
        return TitleInfo(title=ms.title, author=ms.author or "",
                         source="front-matter")
    headings = [b for b in ms.blocks if isinstance(b, Heading)]
    if headings:
        top = max(h.prominence for h in headings)
        h = next(h for h in headings if h.prominence == top)
        return TitleInfo(title=_first_sentence(h.text), author="",
                         source="fallback-extraction")
    for b in ms.blocks:
        if isinstance(b, Paragraph) and b.text.strip():
            return TitleInfo(title=_first_sentence(b.text), author="",
                             source="fallback-extraction")
    raise CoverError("no title source")


def maximize_title_size(title: str, metrics, target_width: float,
                        size_bounds: tuple = MAX_TITLE_BOUNDS) -> MaxTitleResult:
    """Largest size on a 0.1 pt grid at which the widest word of the
    title fits the target width; bisection over the grid (width grows
    monotonically with size). Outside the bounds, the nearer bound is
    returned, with the overflow flag when even the lower bound is too
    wide."""
    if not title.strip():
        raise CoverError("empty title")
    words = title.split()
    lo, hi = size_bounds
    if hi < lo:
        hi = lo
    slack = 1e-9 * max(1.0, target_width)

    def fits(size: float) -> bool:
        widest = max(measure_run(w, metrics, size) for w in words)
        return widest <= target_width + slack

    if not fits(lo):
        return MaxTitleResult(size=lo, overflow=True)
    if fits(hi):
        return MaxTitleResult(size=hi, overflow=False)
    klo, khi = int(round(lo * 10)), int(round(hi * 10))
    # invariant: fits(klo / 10) and not fits(khi / 10)
    while khi - klo > 1:
        mid = (klo + khi) // 2
        if fits(mid / 10.0):
            klo = mid
        else:
            khi = mid
    return MaxTitleResult(size=klo / 10.0, overflow=False)


def _title_lines(text: str, style, metrics, measure_pt: float,
                 language: str):
    bs = BreakStyle(size=style.size, alignment="left", hyphenate=False,
                    ws_min=1.0, ws_max=1.0, ls_min=0.0, ls_max=0.0)
    return linebreak.break_paragraph((Run(text),), bs, measure_pt, metrics,
                                     language=language)


def _aligned_x(x0_mm: float, width_pt: float, measure_mm: float,
               align: str) -> float:
    if align == "centre":
        return x0_mm + max(0.0, measure_mm - width_pt * MM_PER_PT) * 0.5
    return x0_mm


def _text_frame(lines_mm, x0, y0, w, h, role, font, align):
    return Frame(kind="text", layer="content", x=x0, y=y0, w=w, h=h,
                 role=role, lines=tuple(lines_mm), font=font, align=align)


def design_cover(info: TitleInfo, settings, stream: SeededStream,
                 rules: RuleSet):
    """Compose the front and back cover pages.

    The cover color is normally resolved in the settings already; when
    it is not, one is drawn from the palette here.
    """
    s = settings
    color = s.cover_color
    if color is None:
        color = stream.choice(rules.cover_colors).cmyk

    family = s.pairing.body.family
    weight = s.pairing.body.weight
    metrics = metrics_for(family, weight)
    m = s.margins
    x0 = m["inside"]               # front cover reads as a recto
    block_w = s.block_width
    block_h = s.block_height
    block_w_pt = block_w * PT_PER_MM

    t1 = s.titles[0]
    leading_ratio = t1.leading / t1.size if t1.size else 1.125
    title_text = info.title.upper()

    frames = [Frame(kind="decor", layer="background", x=0.0, y=0.0,
                    w=s.page_w, h=s.page_h, role="coverBackground",
                    color=tuple(color))]

    if "maxCoverTitle" in s.features:
        words = title_text.split()
        # cap the size so the stacked words also fit the block height
        height_cap = (block_h * PT_PER_MM) / (max(1, len(words))
                                              * leading_ratio)
        hi = max(t1.size, min(MAX_TITLE_BOUNDS[1], height_cap))
        fit = maximize_title_size(title_text, metrics, block_w_pt,
                                  (t1.size, hi))
        size = fit.size
        leading = size * leading_ratio
        rows = words
    else:
        size = t1.size
        leading = t1.leading
        rows = None

    placed = []
    if rows is None:
        broken = _title_lines(title_text, t1, metrics, block_w_pt,
                              s.language)
        for i, line in enumerate(broken):
            y = m["top"] + (i + 1) * t1.leading * MM_PER_PT
            x = _aligned_x(x0, line.width, block_w, t1.alignment)
            placed.append(PlacedLine(text=line.text, x=x, y=y,
                                     width=line.width * MM_PER_PT,
                                     final=line.final))
        n = len(broken)
    else:
        for i, word in enumerate(rows):
            width = measure_run(word, metrics, size)
            y = m["top"] + (i + 1) * leading * MM_PER_PT
            x = _aligned_x(x0, width, block_w, t1.alignment)
            placed.append(PlacedLine(text=word, x=x, y=y,
                                     width=width * MM_PER_PT, final=True))
        n = len(rows)
    frames.append(_text_frame(
        placed, x0, m["top"], block_w, n * leading * MM_PER_PT,
        "coverTitle",
        {"family": family, "weight": weight, "size": size,
         "leading": leading},
        t1.alignment))

    if info.author:
        author_text = info.author.upper()
        width = measure_run(author_text, metrics, s.body_size)
        y = s.page_h - m["bottom"]
        x = _aligned_x(x0, width, block_w, t1.alignment)
        frames.append(_text_frame(
            [PlacedLine(text=author_text, x=x, y=y,
                        width=width * MM_PER_PT, final=True)],
            x0, y - s.body_size * MM_PER_PT, block_w,
            s.body_leading * MM_PER_PT, "coverAuthor",
            {"family": family, "weight": weight, "size": s.body_size,
             "leading": s.body_leading},
            t1.alignment))

    front = Page(index=0, side="recto", kind="cover", number=None,
                 frames=frames)

    from . import __version__
    note = [f"Generated by folio {__version__}", f"Seed {s.seed}"]
    size_b = s.caption_size
    lead_b = size_b * 1.25
    back_frames = [Frame(kind="decor", layer="background", x=0.0, y=0.0,
                         w=s.page_w, h=s.page_h, role="coverBackground",
                         color=tuple(color))]
    placed = []
    base = s.page_h - m["bottom"]
    for i, text in enumerate(note):
        width = measure_run(text, metrics, size_b)
        y = base - (len(note) - 1 - i) * lead_b * MM_PER_PT
        x = m["outside"] + max(0.0, block_w - width * MM_PER_PT) * 0.5
        placed.append(PlacedLine(text=text, x=x, y=y,
                                 width=width * MM_PER_PT, final=True))
    back_frames.append(_text_frame(
        placed, m["outside"], base - len(note) * lead_b * MM_PER_PT,
        block_w, len(note) * lead_b * MM_PER_PT, "coverNote",
        {"family": family, "weight": weight, "size": size_b,
         "leading": lead_b},
        "centre"))
    back = Page(index=1, side="verso", kind="cover", number=None,
                frames=back_frames)
    return front, back
