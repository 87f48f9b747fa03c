"""Greedy first-fit line breaking with justification elasticity.

A justified line is stretched or shrunk first by scaling word spaces,
then by letter spacing, each within the rule ranges. When spacing alone
cannot reach the measure the breaker prefers a hyphenated fragment of
the next word. Ragged text breaks at the last fitting space at ideal
spacing. Optimal (multi-line lookahead) breaking is out of scope.

Unbreakable fragments wider than the measure are broken at a glyph
boundary and the line is flagged overflow rather than silently
accepted. Lines that cannot be stretched far enough to justify carry
an underfull flag; their stored spacing ratios stay clamped inside the
rule ranges.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fonts import FontMetrics
from .hyphenate import hyphenation_points

_EPS = 1e-6


@dataclass(frozen=True)
class BreakStyle:
    size: float
    alignment: str = "justified"  # justified | left
    hyphenate: bool = True
    ws_min: float = 0.80
    ws_max: float = 1.20
    ls_min: float = -0.05
    ls_max: float = 0.05
    ws_ideal: float = 1.00
    ls_ideal: float = 0.0


@dataclass(frozen=True)
class Line:
    text: str
    width: float            # realized width, pt
    word_spacing: float     # realized ratio
    letter_spacing: float   # realized ratio, em
    hyphenated: bool = False
    overflow: bool = False
    underfull: bool = False
    final: bool = False
    indent: float = 0.0     # pt, offset from the column edge
    spans: tuple = None     # ((start, end, italic, bold, smallCaps), ...)


def _tokenize(runs) -> list:
    """Whitespace-normalized words as (text, per-char flag tuples or None)."""
    chars = []
    for run in runs:
        flag = (getattr(run, "italic", False), getattr(run, "bold", False),
                getattr(run, "small_caps", False))
        if flag == (False, False, False):
            flag = None
        for ch in run.text:
            chars.append((ch, flag))
    words = []
    current = []
    for ch, flag in chars:
        if ch.isspace():
            if current:
                words.append(current)
                current = []
        else:
            current.append((ch, flag))
    if current:
        words.append(current)
    out = []
    for w in words:
        text = "".join(ch for ch, _ in w)
        flags = tuple(f for _, f in w)
        out.append((text, None if all(f is None for f in flags) else flags))
    return out


def _spans_for(tokens_in_line, with_hyphen: bool):
    """Merge per-char flags of the line's tokens into emphasis spans."""
    flags = []
    for i, (text, tflags) in enumerate(tokens_in_line):
        if i:
            flags.append(None)  # the space between words
        if tflags is None:
            flags.extend([None] * len(text))
        else:
            flags.extend(tflags)
    if with_hyphen:
        flags.append(flags[-1] if flags else None)
    if all(f is None for f in flags):
        return None
    spans = []
    start = 0
    for i in range(1, len(flags) + 1):
        if i == len(flags) or flags[i] != flags[start]:
            f = flags[start]
            if f is not None:
                spans.append((start, i, f[0], f[1], f[2]))
            start = i
    return tuple(spans)


class _Measurer:
    """Cumulative width bookkeeping for one line candidate."""

    __slots__ = ("metrics", "size", "space_em", "words_em", "chars", "count")

    def __init__(self, metrics: FontMetrics, size: float):
        self.metrics = metrics
        self.size = size
        self.space_em = metrics.advance_em(" ")
        self.words_em = 0.0
        self.chars = 0
        self.count = 0

    def push(self, text: str):
        self.words_em += self.metrics.word_width_em(text)
        self.chars += len(text)
        self.count += 1

    def geometry(self):
        """(base, spaces_nat, gaps) in pt for the current words."""
        sz = self.size
        base = self.words_em * sz
        spaces = (self.count - 1) * self.space_em * sz
        glyphs = self.chars + (self.count - 1)
        gaps = max(0, glyphs - 1) * sz
        return base, spaces, gaps


def _solve(base, spaces, gaps, measure, style):
    """Pick (ws, ls, width, exact) hitting the measure if possible.
    Word spacing moves first, letter spacing absorbs the rest."""
    if spaces > 0:
        ws = (measure - base) / spaces
        ws = min(style.ws_max, max(style.ws_min, ws))
    else:
        ws = style.ws_ideal
    rem = measure - base - ws * spaces
    if gaps > 0:
        ls = rem / gaps
        ls = min(style.ls_max, max(style.ls_min, ls))
    else:
        ls = style.ls_ideal
    width = base + ws * spaces + ls * gaps
    return ws, ls, width, abs(width - measure) <= _EPS


def _width_at(base, spaces, gaps, ws, ls):
    return base + ws * spaces + ls * gaps


def _glyph_break(token, measure, metrics, style):
    """Emergency split of a token wider than the measure. Returns the
    number of leading glyphs to keep (at least 1)."""
    text = token[0]
    keep = 1
    for i in range(1, len(text) + 1):
        w = metrics.word_width_em(text[:i]) * style.size
        w += (i - 1) * style.ls_min * style.size
        if w <= measure or i == 1:
            keep = i
        else:
            break
    return keep


def _letters_core(text: str):
    """(start, end) of the alphabetic core of a token, for hyphenation
    of words carrying punctuation."""
    a, b = 0, len(text)
    while a < b and not text[a].isalpha():
        a += 1
    while b > a and not text[b - 1].isalpha():
        b -= 1
    return a, b


def break_paragraph(runs, style: BreakStyle, measure: float,
                    metrics: FontMetrics, language: str = "en",
                    first_indent: float = 0.0,
                    rest_indent: float = 0.0) -> list:
    """Break a paragraph (a sequence of styled runs) into lines."""
    if measure <= 0:
        raise ValueError("measure must be positive")
    tokens = _tokenize(runs)
    if not tokens:
        return []
    justified = style.alignment == "justified"
    lines = []
    i = 0

    while i < len(tokens):
        indent = first_indent if not lines else rest_indent
        m = measure - indent
        if m <= 0:
            m = measure  # pathological indent, fall back to full measure

        meas = _Measurer(metrics, style.size)
        taken = []
        geom = (0.0, 0.0, 0.0)
        k = i
        while k < len(tokens):
            save = (meas.words_em, meas.chars, meas.count)
            meas.push(tokens[k][0])
            base, spaces, gaps = meas.geometry()
            if justified:
                fits = _width_at(base, spaces, gaps, style.ws_min,
                                 style.ls_min) <= m + _EPS
            else:
                fits = _width_at(base, spaces, gaps, style.ws_ideal,
                                 style.ls_ideal) <= m + _EPS
            if fits or not taken:
                taken.append(tokens[k])
                geom = (base, spaces, gaps)
                k += 1
                if not fits:
                    break  # single token wider than the measure
            else:
                meas.words_em, meas.chars, meas.count = save
                break

        # single oversized token: emergency glyph-boundary break
        base_1 = metrics.word_width_em(taken[0][0]) * style.size
        single_min = base_1 + (len(taken[0][0]) - 1) * \
            (style.ls_min if justified else style.ls_ideal) * style.size
        if len(taken) == 1 and single_min > m + _EPS:
            token = taken[0]
            keep = _glyph_break(token, m, metrics, style)
            if keep < len(token[0]):
                head = (token[0][:keep],
                        token[1][:keep] if token[1] else None)
                tail = (token[0][keep:],
                        token[1][keep:] if token[1] else None)
                tokens[i] = tail
                emit = [head]
            else:
                emit = [token]
                i += 1
            text = emit[0][0]
            width = metrics.word_width_em(text) * style.size
            lines.append(Line(text=text, width=width,
                              word_spacing=style.ws_ideal,
                              letter_spacing=style.ls_ideal,
                              overflow=True, indent=indent,
                              spans=_spans_for(emit, False)))
            continue

        i = k
        is_last = i >= len(tokens)
        base, spaces, gaps = geom
        natural = _width_at(base, spaces, gaps, style.ws_ideal, style.ls_ideal)

        if not justified:
            lines.append(Line(
                text=" ".join(t[0] for t in taken), width=natural,
                word_spacing=style.ws_ideal, letter_spacing=style.ls_ideal,
                final=is_last, indent=indent,
                spans=_spans_for(taken, False)))
            continue

        if is_last and natural <= m + _EPS:
            lines.append(Line(
                text=" ".join(t[0] for t in taken), width=natural,
                word_spacing=style.ws_ideal, letter_spacing=style.ls_ideal,
                final=True, indent=indent, spans=_spans_for(taken, False)))
            continue

        ws, ls, width, exact = _solve(base, spaces, gaps, m, style)
        hyphenated = False
        if not exact and style.hyphenate and i < len(tokens):
            nxt = tokens[i]
            a, b = _letters_core(nxt[0])
            core = nxt[0][a:b]
            points = hyphenation_points(core, language) if core else []
            best = None
            for p in sorted(points, reverse=True):  # longest fragment first
                frag_text = nxt[0][:a + p] + "-"
                trial = _Measurer(metrics, style.size)
                for t in taken:
                    trial.push(t[0])
                trial.push(frag_text)
                tb, ts, tg = trial.geometry()
                if _width_at(tb, ts, tg, style.ws_min, style.ls_min) > m + _EPS:
                    continue
                tws, tls, twidth, texact = _solve(tb, ts, tg, m, style)
                if texact:
                    best = (p, frag_text, tws, tls, twidth)
                    break
            if best is not None:
                p, frag_text, ws, ls, width = best
                frag = (frag_text,
                        (nxt[1][:a + p] + (nxt[1][a + p - 1],)) if nxt[1] else None)
                taken.append(frag)
                tokens[i] = (nxt[0][a + p:],
                             nxt[1][a + p:] if nxt[1] else None)
                hyphenated = True
                exact = True

        lines.append(Line(
            text=" ".join(t[0] for t in taken), width=width,
            word_spacing=ws, letter_spacing=ls,
            hyphenated=hyphenated, underfull=not exact,
            final=is_last, indent=indent,
            spans=_spans_for(taken, hyphenated)))

    return lines
