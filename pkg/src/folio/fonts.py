"""Font metrics: TrueType/OpenType horizontal metrics, sidecar metric
tables, text measurement, and the family map binding pairing names to
bundled font files.

Responsibilities:
    * parse the four metric tables needed for measurement (head, maxp,
      hhea/hmtx, cmap) straight from a font file;
    * parse the plain-text metrics sidecar format
      (a `unitsPerEm N` header, then `codepoint advance` lines, plus an
      optional `default advance` line for unmapped codepoints);
    * measure text runs at a size with word and letter spacing applied.

Measurement ignores kerning and ligatures by design: lines are built
from plain advances so the same numbers drive layout, the JSON layout
file and the SVG output.
"""

from __future__ import annotations

import json
import struct
from importlib import resources


class FontError(ValueError):
    pass


MM_PER_PT = 25.4 / 72.0
PT_PER_MM = 72.0 / 25.4


class FontMetrics:
    """Per-codepoint advance widths in em units."""

    __slots__ = ("family", "units_per_em", "_advances", "_cmap",
                 "fallback_advance", "_em_cache", "_word_cache")

    def __init__(self, family, units_per_em, advances, cmap, fallback_advance):
        self.family = family
        self.units_per_em = units_per_em
        self._advances = advances          # glyph id -> units
        self._cmap = cmap                  # codepoint -> glyph id
        self.fallback_advance = fallback_advance  # units
        self._em_cache = {}
        self._word_cache = {}

    def advance_em(self, ch: str) -> float:
        """Advance width of a single character in em units."""
        cached = self._em_cache.get(ch)
        if cached is not None:
            return cached
        gid = self._cmap.get(ord(ch))
        units = self._advances[gid] if gid is not None and gid < len(self._advances) \
            else self.fallback_advance
        em = units / self.units_per_em
        self._em_cache[ch] = em
        return em

    def word_width_em(self, word: str) -> float:
        """Natural width of a space-free token, no letter spacing."""
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        w = 0.0
        for ch in word:
            w += self.advance_em(ch)
        self._word_cache[word] = w
        return w


def measure_run(text: str, metrics: FontMetrics, size: float,
                letter_spacing: float = 0.0, word_spacing: float = 1.0) -> float:
    """Width of `text` in points.

    Advances are summed at `size`; every inter-glyph gap (len-1 of them)
    gains letter_spacing em; each space advance is scaled by word_spacing.
    """
    if not text:
        return 0.0
    em = 0.0
    for ch in text:
        a = metrics.advance_em(ch)
        if ch == " ":
            a *= word_spacing
        em += a
    em += (len(text) - 1) * letter_spacing
    return em * size


# -- TrueType/OpenType parsing ------------------------------------------

def _parse_cmap_format4(data, off, cmap):
    seg_x2 = struct.unpack_from(">H", data, off + 6)[0]
    segs = seg_x2 // 2
    ends = struct.unpack_from(f">{segs}H", data, off + 14)
    starts = struct.unpack_from(f">{segs}H", data, off + 16 + seg_x2)
    deltas = struct.unpack_from(f">{segs}h", data, off + 16 + 2 * seg_x2)
    range_off_pos = off + 16 + 3 * seg_x2
    range_offs = struct.unpack_from(f">{segs}H", data, range_off_pos)
    for i in range(segs):
        start, end = starts[i], ends[i]
        if start == 0xFFFF:
            continue
        for cp in range(start, end + 1):
            if range_offs[i] == 0:
                gid = (cp + deltas[i]) & 0xFFFF
            else:
                idx = range_off_pos + 2 * i + range_offs[i] + 2 * (cp - start)
                if idx + 2 > len(data):
                    continue
                gid = struct.unpack_from(">H", data, idx)[0]
                if gid != 0:
                    gid = (gid + deltas[i]) & 0xFFFF
            if gid != 0:
                cmap[cp] = gid


def _parse_cmap_format12(data, off, cmap):
    n_groups = struct.unpack_from(">I", data, off + 12)[0]
    pos = off + 16
    for _ in range(n_groups):
        start, end, start_gid = struct.unpack_from(">III", data, pos)
        pos += 12
        for i, cp in enumerate(range(start, end + 1)):
            cmap[cp] = start_gid + i


def load_font_file(path: str, family: str = "") -> FontMetrics:
    """Read horizontal metrics from a TrueType/OpenType font."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12:
        raise FontError(f"{path}: not a font file")
    version, num_tables = struct.unpack_from(">IH", data, 0)
    if version not in (0x00010000, 0x4F54544F, 0x74727565):
        raise FontError(f"{path}: unsupported font container")
    tables = {}
    for i in range(num_tables):
        tag, _, off, length = struct.unpack_from(">4sIII", data, 12 + 16 * i)
        tables[tag.decode("latin1")] = (off, length)

    for needed in ("head", "maxp", "hhea", "hmtx", "cmap"):
        if needed not in tables:
            raise FontError(f"{path}: missing {needed} table")

    head_off = tables["head"][0]
    units_per_em = struct.unpack_from(">H", data, head_off + 18)[0]
    if units_per_em == 0:
        raise FontError(f"{path}: unitsPerEm is zero")
    num_glyphs = struct.unpack_from(">H", data, tables["maxp"][0] + 4)[0]
    num_hmetrics = struct.unpack_from(">H", data, tables["hhea"][0] + 34)[0]

    hmtx_off = tables["hmtx"][0]
    advances = []
    last = 0
    for i in range(num_hmetrics):
        last = struct.unpack_from(">H", data, hmtx_off + 4 * i)[0]
        advances.append(last)
    # trailing glyphs reuse the last advance
    advances.extend([last] * (num_glyphs - num_hmetrics))

    cmap_off = tables["cmap"][0]
    n_sub = struct.unpack_from(">H", data, cmap_off + 2)[0]
    subtables = []
    for i in range(n_sub):
        plat, enc, sub_off = struct.unpack_from(">HHI", data, cmap_off + 4 + 8 * i)
        subtables.append((plat, enc, cmap_off + sub_off))
    # prefer Windows BMP, then full Unicode, then anything Unicode-ish
    order = sorted(subtables, key=lambda t: (
        0 if (t[0], t[1]) == (3, 1) else
        1 if (t[0], t[1]) == (3, 10) else
        2 if t[0] == 0 else 3))
    cmap = {}
    for plat, enc, off in order:
        fmt = struct.unpack_from(">H", data, off)[0]
        if fmt == 4:
            _parse_cmap_format4(data, off, cmap)
            break
        if fmt == 12:
            _parse_cmap_format12(data, off, cmap)
            break
    if not cmap:
        raise FontError(f"{path}: no usable cmap subtable")

    fallback = advances[0] if advances else units_per_em // 2
    return FontMetrics(family or path, units_per_em, advances, cmap, fallback)


# -- metrics sidecar -----------------------------------------------------

def load_sidecar(path: str, family: str = "") -> FontMetrics:
    """Parse the text sidecar format.

    Lines: `unitsPerEm N` (required, first non-comment line),
    `default ADV` for the fallback advance, `CODEPOINT ADV` otherwise.
    Advances are in font units (ADV / unitsPerEm em). `#` starts a
    comment.
    """
    units_per_em = None
    table = {}
    default = None
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            value = value.strip()
            if key == "unitsPerEm":
                units_per_em = int(value)
            elif key == "default":
                default = float(value)
            else:
                table[int(key)] = float(value)
    if units_per_em is None or units_per_em <= 0:
        raise FontError(f"{path}: unitsPerEm header required")
    if default is None:
        default = units_per_em / 2

    advances = [default] + [table[cp] for cp in sorted(table)]
    cmap = {cp: i + 1 for i, cp in enumerate(sorted(table))}
    return FontMetrics(family or path, units_per_em, advances, cmap, default)


def load_font_metrics(source: str, family: str = "") -> FontMetrics:
    """Dispatch on content: font container magic vs text sidecar."""
    with open(source, "rb") as f:
        magic = f.read(4)
    if magic[:4] in (b"\x00\x01\x00\x00", b"OTTO", b"true"):
        return load_font_file(source, family)
    return load_sidecar(source, family)


# -- family map ----------------------------------------------------------

_metrics_cache: dict = {}


def data_path(*parts) -> str:
    node = resources.files("folio")
    for part in ("data",) + parts:
        node = node.joinpath(part)
    return str(node)


def load_fontmap(path: str | None = None) -> dict:
    actual = path or data_path("fontmap.json")
    with open(actual, encoding="utf-8") as f:
        fm = json.load(f)
    for key in ("classes", "families", "fallbackClass"):
        if key not in fm:
            raise FontError(f"font map missing key {key!r}")
    return fm


_default_fontmap: dict = None


def default_fontmap() -> dict:
    global _default_fontmap
    if _default_fontmap is None:
        _default_fontmap = load_fontmap()
    return _default_fontmap


def family_class(family: str, fontmap: dict = None) -> str:
    fontmap = fontmap or default_fontmap()
    return fontmap["families"].get(family, fontmap["fallbackClass"])


def resolve_font_file(family: str, weight: str, fontmap: dict = None) -> str:
    fontmap = fontmap or default_fontmap()
    cls = family_class(family, fontmap)
    files = fontmap["classes"][cls]
    rel = files.get(weight) or files["regular"]
    return data_path(*rel.split("/"))


def metrics_for(family: str, weight: str, fontmap: dict = None) -> FontMetrics:
    """Load (and cache) metrics for a pairing slot."""
    path = resolve_font_file(family, weight, fontmap)
    m = _metrics_cache.get(path)
    if m is None:
        m = load_font_file(path, family)
        _metrics_cache[path] = m
    return m


def css_family(family: str, fontmap: dict = None) -> str:
    fontmap = fontmap or default_fontmap()
    cls = family_class(family, fontmap)
    return fontmap["classes"][cls].get("cssFamily", cls)
