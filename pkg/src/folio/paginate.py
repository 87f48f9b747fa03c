"""Flow a leveled manuscript into pages.

The flow is column-by-column on a baseline grid whose step is the body
leading. Heading levels get distinct treatment: level 1 stands alone on
its own page, level 2 starts the next page (in multi-column grids it
keeps the first column to itself), level 3 runs inline in bold at body
size. Images sit inline at column width, with a seeded draw letting an
image in the leftmost column span extra columns; captions go below the
image or rotated beside it. Each finished page gets its running header
and page number per the header-layout variant.

Geometry convention: frame rectangles and line positions are in mm from
the page's top-left corner; font sizes and leadings stay in pt. Content
text frames position each line explicitly (x is the line's left edge,
y its baseline); furniture frames carry a single anchor point plus an
alignment, resolved by the renderer.
"""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field

from . import linebreak
from .fonts import MM_PER_PT, PT_PER_MM, FontMetrics, measure_run, metrics_for
from .ingest import Heading, ImageRef, Manuscript, Paragraph, Run
from .linebreak import BreakStyle
from .rules import RuleSet
from .seeds import SeededStream

log = logging.getLogger(__name__)

ORNAMENT_GLYPH = "❡"   # curved stem paragraph ornament
PILCROW_GLYPH = "¶"

# source images carry pixel dimensions; convert at the web-stock density
IMAGE_PX_PER_MM = 96.0 / 25.4

# widow/orphan floor: minimum paragraph lines on each side of a break
MIN_BREAK_LINES = 2

FURNITURE_TOP_OFFSET = 2.0    # mm above the text block, baseline
FURNITURE_BOTTOM_OFFSET = 4.0  # mm below the text block, baseline
ASIDE_GAP = 1.0               # mm between image and rotated caption


class PaginationError(ValueError):
    pass


@dataclass(frozen=True)
class PlacedLine:
    text: str
    x: float                 # mm, left edge
    y: float                 # mm, baseline
    width: float             # mm, realized
    word_spacing: float = 1.0
    letter_spacing: float = 0.0
    indent: float = 0.0      # pt, deliberate first-line shortening
    hyphenated: bool = False
    overflow: bool = False
    underfull: bool = False
    final: bool = False
    spans: tuple = None      # emphasis spans: (start, end, italic, bold, smallCaps)


@dataclass
class Frame:
    kind: str                # text | image | caption | header | pageNumber | decor
    layer: str               # background | content | furniture
    x: float
    y: float
    w: float
    h: float
    role: str = None         # body | title1..title3 | toc | colophon | caption
    lines: tuple = None
    font: dict = None        # {family, weight, size, leading}
    align: str = None        # anchor for single-text frames
    rotation: float = 0.0    # degrees, about the frame anchor
    text: str = None         # furniture / rotated caption payload
    src: str = None          # image name
    color: tuple = None      # decor fill, CMYK
    gradient: dict = None    # decor gradient descriptor


@dataclass
class Page:
    index: int               # 0-based interior order
    side: str                # recto | verso
    kind: str                # body | titleOnly | toc | colophon
    number: int = None       # None on unnumbered front matter
    frames: list = field(default_factory=list)


@dataclass
class LayoutDocument:
    settings: object
    pages: list
    title: str = ""
    author: str = ""
    language: str = "en"
    cover_front: Page = None
    cover_back: Page = None


def interior_side(index: int) -> str:
    """Books open onto a right-hand page."""
    return "recto" if index % 2 == 0 else "verso"


def _display_text(f: Frame) -> str:
    if f.text is not None:
        return f.text
    if f.lines:
        return " ".join(l.text for l in f.lines)
    return ""


def page_word_count(page: Page) -> int:
    """Body words on the page (titles, captions, furniture excluded)."""
    total = 0
    for f in page.frames:
        if f.role == "body" and f.lines:
            for line in f.lines:
                total += len(line.text.split())
    return total


def body_line_lengths(doc: LayoutDocument, include_final: bool = False) -> list:
    """Character counts (spaces included) of full-measure body lines,
    for the realized line-length check. Final lines and indented first
    lines are deliberately short, so they sit outside the population."""
    out = []
    for page in doc.pages:
        for f in page.frames:
            if f.role == "body" and f.lines:
                for line in f.lines:
                    if line.indent:
                        continue
                    if include_final or not line.final:
                        out.append(len(line.text))
    return out


class _DefaultMetrics:
    """Resolves (family, weight) through the bundled font map."""

    def __call__(self, family: str, weight: str) -> FontMetrics:
        return metrics_for(family, weight)


class _Typesetter:
    def __init__(self, manuscript: Manuscript, settings, rules: RuleSet,
                 metrics, stream: SeededStream):
        self.ms = manuscript
        self.s = settings
        self.rules = rules
        self.metrics = metrics
        self.stream = stream

        s = settings
        self.step = s.body_leading                       # pt
        self.block_w = s.block_width                     # mm
        self.block_h = s.block_height                    # mm
        self.block_h_pt = self.block_h * PT_PER_MM
        self.steps_total = int(self.block_h_pt // self.step)
        if self.steps_total < 3:
            raise PaginationError("text block shorter than three lines")
        self.col_w = s.column_width                      # mm
        self.col_w_pt = self.col_w * PT_PER_MM

        self.body_metrics = metrics(s.pairing.body.family, s.pairing.body.weight)
        self.bold_metrics = metrics(s.pairing.body.family, "bold")
        self.title_metrics = metrics(s.pairing.title.family, s.pairing.title.weight)

        ws = rules.word_spacing
        ls = rules.letter_spacing
        self.body_style = BreakStyle(
            size=s.body_size, alignment=s.body_alignment,
            hyphenate=s.hyphenation,
            ws_min=ws.min, ws_max=ws.max, ls_min=ls.min, ls_max=ls.max)
        self.caption_leading = round(s.caption_size * 1.2, 2)

        self.pages: list = []
        self.index_offset = 0        # interior pages before the body (TOC)
        self.heading_marks: list = []  # (level, text, body ordinal)
        self.last_heading = manuscript.title or ""

        self._begin_page("body")

    # -- page and column state ------------------------------------------

    def _begin_page(self, kind: str):
        self.frames: list = []
        self.kind = kind
        self.col = 0
        self.base = 0                 # last occupied baseline index
        self.bands = {}               # col -> [(k0, k1)] blocked baselines

    def _global_index(self) -> int:
        return self.index_offset + len(self.pages)

    def side(self) -> str:
        return interior_side(self._global_index())

    def block_x0(self, side: str = None) -> float:
        side = side or self.side()
        m = self.s.margins
        return m["inside"] if side == "recto" else m["outside"]

    def col_x(self, col: int) -> float:
        return self.block_x0() + col * (self.col_w + self.s.gutter)

    def baseline_mm(self, k: int) -> float:
        return self.s.margins["top"] + k * self.step * MM_PER_PT

    def _finish_page(self, next_kind: str = "body"):
        kind = self.kind
        number = None
        if kind != "toc":
            number = len(self.pages) + 1 if not self.pages else self.pages[-1].number + 1
        if kind not in ("titleOnly", "toc"):
            self.frames.extend(_furniture(self.s, self.rules, self.side(),
                                          number, self.last_heading,
                                          self.caption_leading))
        self.pages.append(Page(index=self._global_index(), side=self.side(),
                               kind=kind, number=number, frames=self.frames))
        self._begin_page(next_kind)

    def _page_has_content(self) -> bool:
        return bool(self.frames) or self.base > 0 or self.col > 0

    def _blocked(self, col: int, k: int) -> int:
        """Return the band end when baseline k is blocked, else 0."""
        for k0, k1 in self.bands.get(col, ()):
            if k0 <= k <= k1:
                return k1
        return 0

    def _next_free(self, col: int, start: int) -> int:
        """First free baseline >= start in the column, or 0 when none."""
        k = start
        while k <= self.steps_total:
            end = self._blocked(col, k)
            if not end:
                return k
            k = end + 1
        return 0

    def _free_count(self, col: int, start: int) -> int:
        n = 0
        k = start
        while k <= self.steps_total:
            end = self._blocked(col, k)
            if end:
                k = end + 1
            else:
                n += 1
                k += 1
        return n

    def _advance_column(self):
        self.col += 1
        self.base = 0
        if self.col >= self.s.columns:
            self._finish_page()

    def _take_baseline(self) -> tuple:
        """Claim the next free baseline, advancing columns and pages as
        needed. Returns (page_ordinal, col, k)."""
        while True:
            k = self._next_free(self.col, self.base + 1)
            if k:
                self.base = k
                return len(self.pages), self.col, k
            self._advance_column()

    def _gap(self, steps: int = 1):
        """Vertical space before a block; dissolves at a column top."""
        for _ in range(steps):
            if self.base == 0:
                return
            k = self._next_free(self.col, self.base + 1)
            if not k:
                self._advance_column()
                return
            self.base = k

    # -- frame emission --------------------------------------------------

    def _font(self, family: str, weight: str, size: float, leading: float) -> dict:
        return {"family": family, "weight": weight,
                "size": size, "leading": leading}

    def _line_x(self, line, align: str, col_x: float, measure_pt: float) -> float:
        if align == "centre":
            return col_x + max(0.0, (measure_pt - line.width)) * 0.5 * MM_PER_PT
        return col_x + line.indent * MM_PER_PT

    def _flush_group(self, group, font, role, align, measure_mm):
        if not group:
            return
        col_x = group[0][3]
        k0 = group[0][2]
        k1 = group[-1][2]
        placed = []
        for line, _, k, cx in group:
            placed.append(PlacedLine(
                text=line.text,
                x=self._line_x(line, align, cx, measure_mm * PT_PER_MM),
                y=self.baseline_mm(k),
                width=line.width * MM_PER_PT,
                word_spacing=line.word_spacing,
                letter_spacing=line.letter_spacing,
                indent=line.indent,
                hyphenated=line.hyphenated, overflow=line.overflow,
                underfull=line.underfull, final=line.final,
                spans=line.spans))
        self.frames.append(Frame(
            kind="text", layer="content",
            x=col_x, y=self.baseline_mm(k0 - 1), w=measure_mm,
            h=(k1 - k0 + 1) * self.step * MM_PER_PT,
            role=role, lines=tuple(placed), font=font,
            align=align))

    def _emit_grid_lines(self, lines, font, role, align):
        """Place pre-broken lines on the baseline grid, one per step,
        splitting frames at column, page, and band boundaries."""
        group = []
        expect = None
        for line in lines:
            page, col, k = self._take_baseline()
            cx = self.col_x(col)
            if group and (page, col, k) != expect:
                self._flush_group(group, font, role, align, self.col_w)
                group = []
            group.append((line, page, k, cx))
            expect = (page, col, k + 1)
        self._flush_group(group, font, role, align, self.col_w)

    # -- headings ---------------------------------------------------------

    def _title_style(self, level: int) -> object:
        return self.s.titles[level - 1]

    def _break_title(self, text: str, level: int, measure_pt: float):
        style = self._title_style(level)
        bs = BreakStyle(size=style.size, alignment="left", hyphenate=False,
                        ws_min=self.body_style.ws_min,
                        ws_max=self.body_style.ws_max,
                        ls_min=self.body_style.ls_min,
                        ls_max=self.body_style.ls_max)
        metrics = self.bold_metrics if level == 3 else self.title_metrics
        return linebreak.break_paragraph((Run(text),), bs, measure_pt, metrics,
                                         language=self.s.language)

    def _emit_title_block(self, lines, level: int, x0: float,
                          measure_mm: float, role: str):
        """Title lines at their own leading, anchored to the block top."""
        style = self._title_style(level)
        placed = []
        for i, line in enumerate(lines):
            y = self.s.margins["top"] + (i + 1) * style.leading * MM_PER_PT
            if style.alignment == "centre":
                x = x0 + max(0.0, measure_mm - line.width * MM_PER_PT) * 0.5
            else:
                x = x0 + line.indent * MM_PER_PT
            placed.append(PlacedLine(
                text=line.text, x=x, y=y, width=line.width * MM_PER_PT,
                word_spacing=line.word_spacing,
                letter_spacing=line.letter_spacing, indent=line.indent,
                final=line.final, spans=line.spans))
        self.frames.append(Frame(
            kind="text", layer="content", x=x0, y=self.s.margins["top"],
            w=measure_mm, h=len(lines) * style.leading * MM_PER_PT,
            role=role, lines=tuple(placed),
            font=self._font(self.s.pairing.title.family,
                            self.s.pairing.title.weight,
                            style.size, style.leading),
            align=style.alignment))
        return len(lines) * style.leading  # pt consumed

    def place_heading(self, h: Heading):
        level = h.level or 3
        # the in-progress page closes under the title it was read beneath,
        # so levels that break the page update the running header after
        if level == 1:
            if self._page_has_content():
                self._finish_page("titleOnly")
            else:
                self.kind = "titleOnly"
            self.last_heading = h.text
            lines = self._break_title(h.text, 1, self.block_w * PT_PER_MM)
            self.heading_marks.append((1, h.text, len(self.pages)))
            self._emit_title_block(lines, 1, self.block_x0(), self.block_w,
                                   "title1")
            self._finish_page()
            return
        if level == 2:
            if self._page_has_content():
                self._finish_page()
            self.last_heading = h.text
            lines = self._break_title(h.text, 2, self.col_w_pt)
            self.heading_marks.append((2, h.text, len(self.pages)))
            used_pt = self._emit_title_block(lines, 2, self.col_x(0),
                                             self.col_w, "title2")
            if self.s.columns > 1:
                # the heading keeps the first column to itself
                self.col = 1
                self.base = 0
            else:
                self.base = min(self.steps_total,
                                int(used_pt // self.step) + 2)
            return
        # level 3: inline, bold, body size, on the grid
        self.last_heading = h.text
        self._gap(1)
        lines = self._break_title(h.text, 3, self.col_w_pt)
        self._emit_grid_lines(
            lines,
            self._font(self.s.pairing.body.family, "bold",
                       self.s.body_size, self.s.body_leading),
            "title3", "left")

    # -- paragraphs -------------------------------------------------------

    def _mark_runs(self, para: Paragraph) -> tuple:
        mark = self.s.paragraph_mark
        if mark == "ornament":
            return (Run(ORNAMENT_GLYPH + " "),) + tuple(para.runs)
        if mark == "pilcrow":
            return (Run(PILCROW_GLYPH + " "),) + tuple(para.runs)
        return tuple(para.runs)

    def _paragraph_indents(self) -> tuple:
        em = self.s.body_size
        mark = self.s.paragraph_mark
        if mark == "negativeIndent":
            return 0.0, em          # hanging: body outdents its first line
        if mark == "positiveIndent":
            return em, 0.0
        return 0.0, 0.0

    def place_paragraph(self, para: Paragraph):
        first, rest = self._paragraph_indents()
        if "randomIndent" in self.s.features:
            first = self.stream.uniform(0.0, 3.0 * self.s.body_size)
        if self.s.space_before:
            self._gap(1)
        lines = linebreak.break_paragraph(
            self._mark_runs(para), self.body_style, self.col_w_pt,
            self.body_metrics, language=self.s.language,
            first_indent=first, rest_indent=rest)
        if not lines:
            return
        font = self._font(self.s.pairing.body.family,
                          self.s.pairing.body.weight,
                          self.s.body_size, self.s.body_leading)
        remaining = list(lines)
        while remaining:
            free = self._free_count(self.col, self.base + 1)
            if free <= 0:
                self._advance_column()
                continue
            count = len(remaining)
            if count <= free:
                take = count
            else:
                take = min(free, count - MIN_BREAK_LINES)
                if take < MIN_BREAK_LINES:
                    self._advance_column()
                    continue
            self._emit_grid_lines(remaining[:take], font, "body",
                                  self.s.body_alignment)
            remaining = remaining[take:]
            if remaining:
                self._advance_column()

    # -- images -----------------------------------------------------------

    def _caption_font(self) -> dict:
        return self._font(self.s.pairing.body.family, "regular",
                          self.s.caption_size, self.caption_leading)

    def _break_caption(self, text: str, measure_pt: float):
        bs = BreakStyle(size=self.s.caption_size, alignment="left",
                        hyphenate=False,
                        ws_min=self.body_style.ws_min,
                        ws_max=self.body_style.ws_max,
                        ls_min=self.body_style.ls_min,
                        ls_max=self.body_style.ls_max)
        return linebreak.break_paragraph((Run(text),), bs, measure_pt,
                                         self.body_metrics,
                                         language=self.s.language)

    def _find_slot(self, cols: list, steps: int) -> int:
        """First baseline where `steps` consecutive baselines are free in
        every listed column, or 0 when the page has no such slot."""
        k = self.base + 1
        while k + steps - 1 <= self.steps_total:
            conflict = 0
            for col in cols:
                for kk in range(k, k + steps):
                    end = self._blocked(col, kk)
                    if end:
                        conflict = max(conflict, end)
                if conflict:
                    break
            if not conflict:
                return k
            k = conflict + 1
        return 0

    def place_image(self, img: ImageRef):
        s = self.s
        span = 1
        if s.columns > 1 and self.col == 0:
            if self.stream.chance(0.5):
                span = self.stream.randint(2, s.columns)

        natural_w = img.width / IMAGE_PX_PER_MM
        aspect = img.height / img.width if img.width else 1.0
        caption = (img.caption or "").strip()
        aside = bool(caption) and s.caption_placement == "asideRotated"

        for _ in range(2):
            slot_w = span * self.col_w + (span - 1) * s.gutter
            strip_w = 0.0
            if aside:
                strip_w = s.caption_size * 1.4 * MM_PER_PT + ASIDE_GAP
            w = min(natural_w, slot_w - strip_w)
            if w <= 0:
                aside = False
                w = min(natural_w, slot_w)
            h = w * aspect

            cap_lines = []
            cap_h_pt = 0.0
            if caption and not aside:
                cap_lines = self._break_caption(caption, w * PT_PER_MM)
                cap_h_pt = len(cap_lines) * self.caption_leading

            total_pt = h * PT_PER_MM + cap_h_pt
            steps = max(1, math.ceil(total_pt / self.step))
            if steps > self.steps_total:
                # taller than the block: shrink to fit, keep the aspect
                avail_pt = self.steps_total * self.step - cap_h_pt
                if avail_pt <= 0:
                    avail_pt = self.steps_total * self.step * 0.5
                h = avail_pt * MM_PER_PT
                w = min(w, h / aspect if aspect else w)
                h = w * aspect
                total_pt = h * PT_PER_MM + cap_h_pt
                steps = max(1, math.ceil(total_pt / self.step))

            cols = list(range(self.col, min(self.col + span, s.columns)))
            k0 = self._find_slot(cols, steps)
            if k0:
                break
            if self._page_has_content():
                self._finish_page()
            else:
                self._advance_column()
            span = min(span, s.columns - self.col)
        else:
            raise PaginationError(f"image {img.name!r} does not fit any page")

        x0 = self.col_x(self.col)
        y0 = self.baseline_mm(k0 - 1)
        x = x0 + max(0.0, slot_w - strip_w - w) * 0.5
        # the resolved file path, so the renderer can embed the pixels
        self.frames.append(Frame(
            kind="image", layer="content", x=x, y=y0, w=w, h=h,
            role="image", src=img.path))

        if caption:
            if aside:
                self.frames.append(Frame(
                    kind="caption", layer="content",
                    x=x + w + ASIDE_GAP, y=y0,
                    w=strip_w - ASIDE_GAP, h=h,
                    role="caption", text=_fit_rotated_caption(
                        caption, self.body_metrics, s.caption_size,
                        h * PT_PER_MM),
                    font=self._caption_font(), align="centre", rotation=-90.0))
            else:
                placed = []
                for i, line in enumerate(cap_lines):
                    placed.append(PlacedLine(
                        text=line.text, x=x,
                        y=y0 + h + (i + 1) * self.caption_leading * MM_PER_PT,
                        width=line.width * MM_PER_PT, final=line.final,
                        spans=line.spans))
                self.frames.append(Frame(
                    kind="caption", layer="content",
                    x=x, y=y0 + h, w=w,
                    h=cap_h_pt * MM_PER_PT,
                    role="caption", lines=tuple(placed),
                    font=self._caption_font(), align="left"))

        k_end = k0 + steps - 1
        for col in cols:
            if col == self.col:
                continue
            self.bands.setdefault(col, []).append((k0, k_end))
        self.base = k_end

    # -- colophon -----------------------------------------------------------

    def place_colophon(self):
        from . import __version__
        s = self.s
        if self._page_has_content():
            self._finish_page("colophon")
        else:
            self.kind = "colophon"
        m = s.margins
        cols_text = "1 column" if s.columns == 1 else f"{s.columns} columns"
        lines = [t for t in (self.ms.title, self.ms.author) if t]
        lines += [
            "",
            f"Generated by folio {__version__}",
            f"Seed {s.seed}",
            f"Page size {s.page_w:g} × {s.page_h:g} mm",
            f"Margins {m['top']:g} / {m['inside']:g} / {m['bottom']:g} / "
            f"{m['outside']:g} mm",
            cols_text,
            f"Titles set in {s.pairing.title.family}",
            f"Text set in {s.pairing.body.family} "
            f"{s.body_size:g}/{s.body_leading:g} pt, {s.body_alignment}",
            f"Hyphenation {'on' if s.hyphenation else 'off'}",
            f"Language {s.language}",
        ]
        lines = [l for l in lines if l is not None]
        font = self._font(s.pairing.body.family, s.pairing.body.weight,
                          s.body_size, s.body_leading)
        x0 = self.block_x0()
        start = self.steps_total - len(lines) + 1
        if start < 1:
            start = 1
            lines = lines[: self.steps_total]
        placed = []
        for i, text in enumerate(lines):
            k = start + i
            width = measure_run(text, self.body_metrics, s.body_size)
            placed.append(PlacedLine(text=text, x=x0, y=self.baseline_mm(k),
                                     width=width * MM_PER_PT, final=True))
        self.frames.append(Frame(
            kind="text", layer="content", x=x0,
            y=self.baseline_mm(start - 1), w=self.block_w,
            h=len(lines) * self.step * MM_PER_PT,
            role="colophon", lines=tuple(placed), font=font, align="left"))
        self._finish_page()

    # -- main flow ----------------------------------------------------------

    def run(self) -> list:
        for block in self.ms.blocks:
            if isinstance(block, Heading):
                self.place_heading(block)
            elif isinstance(block, ImageRef):
                self.place_image(block)
            elif isinstance(block, Paragraph):
                self.place_paragraph(block)
        if self.s.colophon:
            self.place_colophon()
        if self._page_has_content():
            self._finish_page()
        return self.pages


def _fit_rotated_caption(text: str, metrics: FontMetrics, size: float,
                         run_pt: float) -> str:
    """Trim the caption so its rotated single line fits the image height."""
    if measure_run(text, metrics, size) <= run_pt:
        return text
    ell = "…"
    while text and measure_run(text + ell, metrics, size) > run_pt:
        text = text[:-1].rstrip()
    return text + ell if text else ell


# -- running header and page number furniture --------------------------------


def _furniture(settings, rules: RuleSet, side: str, number,
               header_text: str, caption_leading: float) -> list:
    layout = rules.header_layout_by_id(settings.header_layout)
    if layout is None:
        raise PaginationError(f"unknown header layout {settings.header_layout!r}")
    s = settings
    m = s.margins
    size = s.caption_size
    font = {"family": s.pairing.body.family, "weight": "regular",
            "size": size, "leading": caption_leading}
    block_x0 = m["inside"] if side == "recto" else m["outside"]
    block_x1 = block_x0 + s.block_width
    y_top = max(3.0, m["top"] - FURNITURE_TOP_OFFSET)
    y_bottom = s.page_h - m["bottom"] + FURNITURE_BOTTOM_OFFSET
    frames = []

    h = layout.header
    if h["rotation"]:
        # vertically centred strip in the outer margin
        x = s.page_w - m["outside"] / 2.0 if side == "recto" else m["outside"] / 2.0
        frames.append(Frame(kind="header", layer="furniture", x=x,
                            y=s.page_h / 2.0, w=0.0, h=0.0, text=header_text,
                            font=font, align="centre",
                            rotation=float(h["rotation"])))
    else:
        y = y_top if h["edge"] == "top" else y_bottom
        if h["align"] == "leftIndent":
            frames.append(Frame(kind="header", layer="furniture",
                                x=block_x0 + 2.0, y=y, w=0.0, h=0.0,
                                text=header_text, font=font, align="left"))
        else:  # blockCentre
            frames.append(Frame(kind="header", layer="furniture",
                                x=block_x0 + s.block_width / 2.0, y=y,
                                w=0.0, h=0.0, text=header_text, font=font,
                                align="centre"))

    if number is not None:
        p = layout.page_number
        y = y_top if p["edge"] == "top" else y_bottom
        text = str(number)
        if p["align"] == "rightMargin":
            frames.append(Frame(kind="pageNumber", layer="furniture",
                                x=block_x1, y=y, w=0.0, h=0.0, text=text,
                                font=font, align="right"))
        elif p["align"] == "blockCentre":
            frames.append(Frame(kind="pageNumber", layer="furniture",
                                x=block_x0 + s.block_width / 2.0, y=y,
                                w=0.0, h=0.0, text=text, font=font,
                                align="centre"))
        elif p["align"] == "outerMargin":
            if side == "recto":
                frames.append(Frame(kind="pageNumber", layer="furniture",
                                    x=block_x1, y=y, w=0.0, h=0.0, text=text,
                                    font=font, align="right"))
            else:
                # slightly indented from the text block on the left page
                frames.append(Frame(kind="pageNumber", layer="furniture",
                                    x=block_x0 - 2.0, y=y, w=0.0, h=0.0,
                                    text=text, font=font, align="right"))
        else:  # topCorner: centred on the inner margin, top corner
            x = m["inside"] / 2.0 if side == "recto" \
                else s.page_w - m["inside"] / 2.0
            frames.append(Frame(kind="pageNumber", layer="furniture",
                                x=x, y=y_top, w=0.0, h=0.0, text=text,
                                font=font, align="centre"))
    return frames


# -- table of contents --------------------------------------------------------


def _toc_entry_steps(settings, level: int) -> int:
    leading = settings.titles[level - 1].leading
    return max(1, math.ceil(leading / settings.body_leading))


def toc_page_count(manuscript: Manuscript, settings) -> int:
    """Pages the TOC will need; computed before the body is laid out so
    the body's recto/verso parity never depends on the TOC build."""
    if not settings.toc:
        return 0
    entries = [b for b in manuscript.blocks
               if isinstance(b, Heading) and (b.level or 3) <= 2]
    if not entries:
        log.info("toc requested but the manuscript has no headings")
        return 0
    steps_total = int((settings.block_height * PT_PER_MM)
                      // settings.body_leading)
    pages = 1
    used = 0
    for h in entries:
        need = _toc_entry_steps(settings, h.level or 2)
        if used + need > steps_total:
            pages += 1
            used = need
        else:
            used += need
    return pages


def _build_toc(settings, heading_numbers: list, metrics, rules: RuleSet) -> list:
    """TOC pages from (level, text, page_number) entries; geometry must
    agree with toc_page_count."""
    s = settings
    steps_total = int((s.block_height * PT_PER_MM) // s.body_leading)
    title_metrics = metrics(s.pairing.title.family, s.pairing.title.weight)
    pages = []
    frames: list = []
    used = 0

    def flush():
        nonlocal frames, used
        idx = len(pages)
        pages.append(Page(index=idx, side=interior_side(idx), kind="toc",
                          number=None, frames=frames))
        frames = []
        used = 0

    for level, text, number in heading_numbers:
        need = _toc_entry_steps(s, level)
        if used + need > steps_total:
            flush()
        used += need
        style = s.titles[level - 1]
        side = interior_side(len(pages))
        x0 = s.margins["inside"] if side == "recto" else s.margins["outside"]
        x1 = x0 + s.block_width
        y = s.margins["top"] + used * s.body_leading * MM_PER_PT
        num_text = str(number)
        num_w = measure_run(num_text, title_metrics, style.size) * MM_PER_PT
        max_text_pt = (s.block_width - num_w) * PT_PER_MM \
            - 2.0 * style.size
        shown = text
        if measure_run(shown, title_metrics, style.size) > max_text_pt:
            while shown and measure_run(shown + "…", title_metrics,
                                        style.size) > max_text_pt:
                shown = shown[:-1].rstrip()
            shown += "…"
        width = measure_run(shown, title_metrics, style.size) * MM_PER_PT
        font = {"family": s.pairing.title.family,
                "weight": s.pairing.title.weight,
                "size": style.size, "leading": style.leading}
        frames.append(Frame(
            kind="text", layer="content", x=x0,
            y=y - s.body_leading * need * MM_PER_PT,
            w=s.block_width, h=s.body_leading * need * MM_PER_PT,
            role="toc", font=font, align="left",
            lines=(PlacedLine(text=shown, x=x0, y=y, width=width, final=True),
                   PlacedLine(text=num_text, x=x1 - num_w, y=y,
                              width=num_w, final=True))))
    if frames:
        flush()
    return pages


# -- verification ---------------------------------------------------------------


def _verify(doc: LayoutDocument, settings, rules: RuleSet):
    lengths = body_line_lengths(doc)
    ll = rules.line_length
    if len(lengths) >= 10:
        med = statistics.median(lengths)
        lo = ll["justifiedMin"] if settings.body_alignment == "justified" \
            else ll["min"]
        if not (lo <= med <= ll["max"]):
            raise PaginationError(
                f"realized median {med:.1f} chars/line outside "
                f"[{lo}, {ll['max']}]: size fitting failed upstream")
    cap_key = "oneColumn" if settings.columns == 1 else "multiColumn"
    cap = rules.page_capacity[cap_key]
    for page in doc.pages:
        words = page_word_count(page)
        if words > cap:
            raise PaginationError(
                f"page {page.index} holds {words} words, over the "
                f"{cap}-word capacity: size fitting failed upstream")


# -- entry point ----------------------------------------------------------------


def paginate(manuscript: Manuscript, settings, rules: RuleSet,
             metrics=None, stream: SeededStream = None) -> LayoutDocument:
    """Typeset the manuscript under fitted settings into a page list."""
    if metrics is None:
        metrics = _DefaultMetrics()
    if stream is None:
        stream = SeededStream(settings.seed)

    ts = _Typesetter(manuscript, settings, rules, metrics, stream)
    ts.index_offset = toc_page_count(manuscript, settings)
    body_pages = ts.run()

    toc_pages = []
    if ts.index_offset:
        numbers = []
        for level, text, ordinal in ts.heading_marks:
            page = body_pages[ordinal] if ordinal < len(body_pages) else None
            numbers.append((level, text, page.number if page else 0))
        toc_pages = _build_toc(settings, numbers, metrics, rules)
        if len(toc_pages) != ts.index_offset:
            raise PaginationError(
                f"toc used {len(toc_pages)} pages, planned {ts.index_offset}")

    doc = LayoutDocument(settings=settings, pages=toc_pages + body_pages,
                         title=manuscript.title, author=manuscript.author,
                         language=manuscript.language)
    _verify(doc, settings, rules)
    return doc
