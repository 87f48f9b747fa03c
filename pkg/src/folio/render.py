"""Serialize a finished layout to SVG pages and a canonical layout file.

Each page becomes a standalone SVG 1.1 document sized in millimetres,
with one user unit per millimetre. Text never relies on viewer line
breaking: every line is an absolutely positioned text element carrying
its realized word and letter spacing. Layers paint in the fixed order
background, content, furniture.

The layout file is the byte-comparison artifact for determinism tests:
keys in a fixed order, every float printed with three decimals (0.001 mm
grid), no environment-dependent content.

CMYK converts to sRGB with the naive uncalibrated formula
``channel = 255 x (1 - component/100) x (1 - k/100)``; color fidelity is
out of scope, inspectability is the goal.
"""

from __future__ import annotations

import base64
import os
from xml.sax.saxutils import escape

from .fonts import MM_PER_PT, css_family, metrics_for
from .paginate import Frame, LayoutDocument, Page, PlacedLine

LAYER_ORDER = ("background", "content", "furniture")

_MIME = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg",
         ".gif": "image/gif", ".svg": "image/svg+xml",
         ".webp": "image/webp"}


def cmyk_to_rgb(cmyk) -> tuple:
    c, m, y, k = (v / 100.0 for v in cmyk)
    return (round(255 * (1 - c) * (1 - k)),
            round(255 * (1 - m) * (1 - k)),
            round(255 * (1 - y) * (1 - k)))


def _rgb_attr(cmyk) -> str:
    r, g, b = cmyk_to_rgb(cmyk)
    return f"rgb({r},{g},{b})"


def _f(x: float) -> str:
    out = f"{float(x):.3f}"
    return "0.000" if out == "-0.000" else out


def _font_attrs(font: dict) -> str:
    fam = escape(css_family(font["family"]), {'"': "&quot;"})
    size = _f(font["size"] * MM_PER_PT)
    weight = " font-weight=\"bold\"" if font.get("weight") == "bold" else ""
    return f'font-family="{fam}" font-size="{size}"{weight}'


def _spacing_attrs(line: PlacedLine, font: dict, metrics) -> str:
    out = []
    if line.letter_spacing:
        ls = line.letter_spacing * font["size"] * MM_PER_PT
        out.append(f'letter-spacing="{_f(ls)}"')
    if line.word_spacing != 1.0:
        extra = (line.word_spacing - 1.0) * metrics.advance_em(" ") \
            * font["size"] * MM_PER_PT
        out.append(f'word-spacing="{_f(extra)}"')
    return (" " + " ".join(out)) if out else ""


def _span_markup(line: PlacedLine) -> str:
    text = line.text
    if not line.spans:
        return escape(text)
    parts = []
    pos = 0
    for start, end, italic, bold, small in line.spans:
        if start > pos:
            parts.append(escape(text[pos:start]))
        attrs = []
        if italic:
            attrs.append('font-style="italic"')
        if bold:
            attrs.append('font-weight="bold"')
        if small:
            attrs.append('font-variant="small-caps"')
        parts.append(f'<tspan {" ".join(attrs)}>{escape(text[start:end])}'
                     "</tspan>")
        pos = end
    if pos < len(text):
        parts.append(escape(text[pos:]))
    return "".join(parts)


def _decor_svg(f: Frame, defs: list, page_tag: str, n: int) -> str:
    if f.gradient is not None:
        g = f.gradient
        gid = f"g-{page_tag}-{n}"
        defs.append(
            f'<linearGradient id="{gid}" x1="{_f(g["x1"])}" '
            f'y1="{_f(g["y1"])}" x2="{_f(g["x2"])}" y2="{_f(g["y2"])}">'
            f'<stop offset="0" stop-color="{_rgb_attr(g["start"])}"/>'
            f'<stop offset="1" stop-color="{_rgb_attr(g["end"])}"/>'
            "</linearGradient>")
        fill = f"url(#{gid})"
    else:
        fill = _rgb_attr(f.color or (0, 0, 0, 0))
    return (f'<rect x="{_f(f.x)}" y="{_f(f.y)}" width="{_f(f.w)}" '
            f'height="{_f(f.h)}" fill="{fill}"/>')


def _image_svg(f: Frame) -> str:
    """Embed the source image when it is readable, else draw a labeled
    placeholder so the layout stays inspectable."""
    path = f.src
    ext = os.path.splitext(path or "")[1].lower()
    mime = _MIME.get(ext)
    if path and mime and os.path.isfile(path):
        with open(path, "rb") as fh:
            data = base64.b64encode(fh.read()).decode("ascii")
        return (f'<image x="{_f(f.x)}" y="{_f(f.y)}" width="{_f(f.w)}" '
                f'height="{_f(f.h)}" preserveAspectRatio="none" '
                f'xlink:href="data:{mime};base64,{data}"/>')
    label = escape(os.path.basename(path or "image"))
    return (f'<g><rect x="{_f(f.x)}" y="{_f(f.y)}" width="{_f(f.w)}" '
            f'height="{_f(f.h)}" fill="rgb(235,235,235)" '
            f'stroke="rgb(180,180,180)" stroke-width="0.2"/>'
            f'<text x="{_f(f.x + f.w / 2)}" y="{_f(f.y + f.h / 2)}" '
            f'font-family="sans-serif" font-size="3" '
            f'text-anchor="middle">{label}</text></g>')


def _anchor(align: str) -> str:
    return {"centre": "middle", "right": "end"}.get(align, "start")


def _single_text_svg(f: Frame) -> str:
    """Furniture and rotated captions: one anchored text element."""
    attrs = [f'x="{_f(f.x)}"', f'y="{_f(f.y)}"']
    if f.font:
        attrs.append(_font_attrs(f.font))
    anchor = _anchor(f.align)
    if anchor != "start":
        attrs.append(f'text-anchor="{anchor}"')
    if f.rotation:
        attrs.append(f'transform="rotate({_f(f.rotation)} {_f(f.x)} '
                     f'{_f(f.y)})"')
    return f'<text {" ".join(attrs)}>{escape(f.text or "")}</text>'


def _text_frame_svg(f: Frame, metrics_cache: dict) -> str:
    font = f.font or {}
    key = (font.get("family"), font.get("weight", "regular"))
    metrics = metrics_cache.get(key)
    if metrics is None:
        metrics = metrics_for(key[0], key[1] or "regular")
        metrics_cache[key] = metrics
    parts = [f'<g {_font_attrs(font)}>']
    for line in f.lines or ():
        spacing = _spacing_attrs(line, font, metrics)
        parts.append(f'<text x="{_f(line.x)}" y="{_f(line.y)}"{spacing}>'
                     f"{_span_markup(line)}</text>")
    parts.append("</g>")
    return "".join(parts)


_metrics_cache = {}


def render_page_svg(page: Page, settings, page_tag: str = None) -> str:
    """One standalone SVG document for one page."""
    w, h = float(settings.page_w), float(settings.page_h)
    tag = page_tag or str(page.index)
    defs = []
    body = []
    n = 0
    for layer in LAYER_ORDER:
        for f in page.frames:
            if f.layer != layer:
                continue
            if f.kind == "decor":
                body.append(_decor_svg(f, defs, tag, n))
                n += 1
            elif f.kind == "image":
                body.append(_image_svg(f))
            elif f.lines is not None:
                body.append(_text_frame_svg(f, _metrics_cache))
            else:
                body.append(_single_text_svg(f))
    defs_markup = f'<defs>{"".join(defs)}</defs>' if defs else ""
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        'xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" '
        f'width="{w:g}mm" height="{h:g}mm" '
        f'viewBox="0 0 {w:g} {h:g}">'
        f"{defs_markup}"
        f'<rect x="0" y="0" width="{w:g}" height="{h:g}" '
        'fill="white"/>'
        f'{"".join(body)}</svg>'
    )


def render_svg(doc: LayoutDocument) -> list:
    """One SVG document per interior page, in page order."""
    return [render_page_svg(p, doc.settings, f"p{i}")
            for i, p in enumerate(doc.pages)]


# -- canonical layout file -------------------------------------------------

def _ser(value, out: list):
    if isinstance(value, dict):
        out.append("{")
        first = True
        for k, v in value.items():
            if not first:
                out.append(",")
            first = False
            out.append(f'"{k}":')
            _ser(v, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            if i:
                out.append(",")
            _ser(v, out)
        out.append("]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, float):
        out.append(_f(value))
    elif isinstance(value, int):
        out.append(str(value))
    elif value is None:
        out.append("null")
    else:
        import json
        out.append(json.dumps(str(value), ensure_ascii=False))


def _line_dict(l: PlacedLine) -> dict:
    d = {"text": l.text, "x": float(l.x), "y": float(l.y),
         "width": float(l.width)}
    # gate on the quantized values, so parse + re-serialize is a fixpoint
    ws = round(float(l.word_spacing), 3)
    if ws != 1.0:
        d["wordSpacing"] = ws
    ls = round(float(l.letter_spacing), 3)
    if ls:
        d["letterSpacing"] = ls
    ind = round(float(l.indent), 3)
    if ind:
        d["indent"] = ind
    for flag in ("hyphenated", "overflow", "underfull", "final"):
        if getattr(l, flag):
            d[flag] = True
    if l.spans:
        d["spans"] = [[s[0], s[1], bool(s[2]), bool(s[3]), bool(s[4])]
                      for s in l.spans]
    return d


def _frame_dict(f: Frame) -> dict:
    d = {"kind": f.kind, "layer": f.layer, "x": float(f.x),
         "y": float(f.y), "w": float(f.w), "h": float(f.h)}
    if f.role:
        d["role"] = f.role
    if f.align:
        d["align"] = f.align
    rot = round(float(f.rotation), 3)
    if rot:
        d["rotation"] = rot
    if f.font:
        d["font"] = {"family": f.font["family"],
                     "weight": f.font.get("weight", "regular"),
                     "size": float(f.font["size"]),
                     "leading": float(f.font["leading"])}
    if f.text is not None:
        d["text"] = f.text
    if f.src is not None:
        d["src"] = f.src
    if f.color is not None:
        d["color"] = [int(v) for v in f.color]
    if f.gradient is not None:
        g = f.gradient
        d["gradient"] = {"start": [int(v) for v in g["start"]],
                         "end": [int(v) for v in g["end"]],
                         "x1": float(g["x1"]), "y1": float(g["y1"]),
                         "x2": float(g["x2"]), "y2": float(g["y2"])}
    if f.lines is not None:
        d["lines"] = [_line_dict(l) for l in f.lines]
    return d


def _page_dict(p: Page) -> dict:
    return {"index": p.index, "side": p.side, "kind": p.kind,
            "number": p.number,
            "frames": [_frame_dict(f) for f in p.frames]}


def write_layout_json(doc: LayoutDocument) -> str:
    """Canonical text form of the document; equal documents give equal
    bytes, floats land on the 0.001 mm grid."""
    settings = doc.settings
    if hasattr(settings, "size_id"):
        from .planner import settings_to_dict
        settings = settings_to_dict(settings)
    payload = {
        "settings": settings,
        "title": doc.title,
        "author": doc.author,
        "language": doc.language,
        "pageCount": len(doc.pages),
        "pages": [_page_dict(p) for p in doc.pages],
        "coverFront": _page_dict(doc.cover_front) if doc.cover_front else None,
        "coverBack": _page_dict(doc.cover_back) if doc.cover_back else None,
    }
    out = []
    _ser(payload, out)
    return "".join(out) + "\n"


def _line_from_dict(d: dict) -> PlacedLine:
    return PlacedLine(
        text=d["text"], x=d["x"], y=d["y"], width=d["width"],
        word_spacing=d.get("wordSpacing", 1.0),
        letter_spacing=d.get("letterSpacing", 0.0),
        indent=d.get("indent", 0.0),
        hyphenated=d.get("hyphenated", False),
        overflow=d.get("overflow", False),
        underfull=d.get("underfull", False),
        final=d.get("final", False),
        spans=tuple(tuple(s) for s in d["spans"]) if "spans" in d else None)


def _frame_from_dict(d: dict) -> Frame:
    g = d.get("gradient")
    return Frame(
        kind=d["kind"], layer=d["layer"], x=d["x"], y=d["y"], w=d["w"],
        h=d["h"], role=d.get("role"), align=d.get("align"),
        rotation=d.get("rotation", 0.0), font=d.get("font"),
        text=d.get("text"), src=d.get("src"),
        color=tuple(d["color"]) if "color" in d else None,
        gradient={"start": g["start"], "end": g["end"], "x1": g["x1"],
                  "y1": g["y1"], "x2": g["x2"], "y2": g["y2"]}
        if g else None,
        lines=tuple(_line_from_dict(l) for l in d["lines"])
        if "lines" in d else None)


def _page_from_dict(d: dict) -> Page:
    return Page(index=d["index"], side=d["side"], kind=d["kind"],
                number=d["number"],
                frames=[_frame_from_dict(f) for f in d["frames"]])


def read_layout_json(text: str) -> LayoutDocument:
    """Inverse of write_layout_json; settings stay a plain mapping."""
    import json
    data = json.loads(text)
    return LayoutDocument(
        settings=data["settings"],
        pages=[_page_from_dict(p) for p in data["pages"]],
        title=data["title"], author=data["author"],
        language=data["language"],
        cover_front=_page_from_dict(data["coverFront"])
        if data.get("coverFront") else None,
        cover_back=_page_from_dict(data["coverBack"])
        if data.get("coverBack") else None)


def write_outputs(doc: LayoutDocument, out_dir: str,
                  settings_text: str = None) -> list:
    """Write the output tree: settings.json, layout.json, fontmap.json,
    pages/page-0001.svg onward, and the cover SVGs when present.
    Returns the list of written paths."""
    from .fonts import default_fontmap
    import json

    pages_dir = os.path.join(out_dir, "pages")
    os.makedirs(pages_dir, exist_ok=True)
    written = []

    def put(rel: str, text: str):
        path = os.path.join(out_dir, rel)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    if settings_text is None and hasattr(doc.settings, "size_id"):
        from .planner import export_settings
        settings_text = export_settings(doc.settings)
    if settings_text is not None:
        put("settings.json", settings_text)
    put("layout.json", write_layout_json(doc))
    put("fontmap.json",
        json.dumps(default_fontmap(), indent=2, sort_keys=True) + "\n")
    for i, page in enumerate(doc.pages):
        svg = render_page_svg(page, doc.settings, f"p{i}")
        put(os.path.join("pages", f"page-{i + 1:04d}.svg"), svg)
    if doc.cover_front is not None:
        put("cover-front.svg",
            render_page_svg(doc.cover_front, doc.settings, "cf"))
    if doc.cover_back is not None:
        put("cover-back.svg",
            render_page_svg(doc.cover_back, doc.settings, "cb"))
    return written
