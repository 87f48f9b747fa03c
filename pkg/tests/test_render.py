"""SVG serialization and the canonical layout file."""

import json
import xml.etree.ElementTree as ET

import pytest

from folio.cover import design_cover, extract_title
from folio.fonts import MM_PER_PT, metrics_for
from folio.ingest import classify, parse_manuscript
from folio.paginate import Frame, LayoutDocument, Page, PlacedLine, paginate
from folio.render import (cmyk_to_rgb, read_layout_json, render_page_svg,
                          render_svg, write_layout_json, write_outputs, _f)
from folio.seeds import SeededStream

from corpus import manuscript_source
from test_paginate import planned, pins

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def small_doc(rules):
    src = manuscript_source(101, 900, chapters=1)
    ms, s = planned(rules, src, colophon=True, **pins())
    doc = paginate(ms, s, rules)
    front, back = design_cover(extract_title(ms), s, SeededStream(s.seed),
                               rules)
    doc.cover_front = front
    doc.cover_back = back
    return ms, s, doc


# -- color and number formatting ------------------------------------------

@pytest.mark.parametrize("cmyk,rgb", [
    ((0, 0, 0, 0), (255, 255, 255)),
    ((0, 0, 0, 100), (0, 0, 0)),
    ((100, 100, 100, 100), (0, 0, 0)),
    ((2, 14, 38, 0), (250, 219, 158)),
    ((100, 0, 0, 50), (0, 128, 128)),
])
def test_cmyk_examples(cmyk, rgb):
    assert cmyk_to_rgb(cmyk) == rgb


def test_float_grid():
    assert _f(12.00049) == "12.000"
    assert _f(12.0006) == "12.001"
    assert _f(0) == "0.000"
    assert _f(-3.25) == "-3.250"


def test_negative_zero_never_printed():
    assert _f(-1e-9) == "0.000"
    assert _f(-0.0) == "0.000"


# -- page svg ----------------------------------------------------------------

def simple_page():
    decor = Frame(kind="decor", layer="background", x=0, y=0, w=50, h=80,
                  role="halfBackground", color=(10, 20, 30, 0))
    body = Frame(
        kind="text", layer="content", x=10.0, y=12.0, w=76.0, h=40.0,
        role="body",
        font={"family": "Adobe Caslon", "weight": "regular",
              "size": 10.0, "leading": 13.0},
        lines=(PlacedLine(text="hello & <world>", x=10.0, y=16.0,
                          width=60.0, word_spacing=1.1,
                          letter_spacing=0.02),))
    header = Frame(kind="header", layer="furniture", x=12.0, y=6.0,
                   w=0.0, h=0.0, text="running head", align="left",
                   font={"family": "Adobe Caslon", "weight": "regular",
                         "size": 8.0, "leading": 9.6})
    number = Frame(kind="pageNumber", layer="furniture", x=55.0, y=6.0,
                   w=0.0, h=0.0, text="7", align="right",
                   font={"family": "Adobe Caslon", "weight": "regular",
                         "size": 8.0, "leading": 9.6})
    return Page(index=0, side="recto", kind="body", number=7,
                frames=[header, body, decor, number])


def settings_ns():
    from types import SimpleNamespace
    return SimpleNamespace(page_w=130.0, page_h=200.0)


def test_svg_document_shape():
    svg = render_page_svg(simple_page(), settings_ns())
    root = ET.fromstring(svg)
    assert root.tag == f"{SVG}svg"
    assert root.get("width") == "130mm"
    assert root.get("height") == "200mm"
    assert root.get("viewBox") == "0 0 130 200"
    kids = list(root)
    assert kids[0].tag == f"{SVG}rect"  # white base sheet
    assert kids[0].get("fill") == "white"


def test_layers_paint_background_content_furniture():
    svg = render_page_svg(simple_page(), settings_ns())
    root = ET.fromstring(svg)
    kids = list(root)[1:]  # past the base sheet
    # decor rect first despite being listed third in the frame list
    assert kids[0].tag == f"{SVG}rect"
    assert kids[0].get("fill") == "rgb(230,204,178)"
    assert kids[1].tag == f"{SVG}g"    # body text group
    texts = [k for k in kids[2:] if k.tag == f"{SVG}text"]
    assert [t.text for t in texts] == ["running head", "7"]


def test_text_lines_carry_realized_spacing():
    svg = render_page_svg(simple_page(), settings_ns())
    root = ET.fromstring(svg)
    g = next(k for k in root if k.tag == f"{SVG}g")
    line = list(g)[0]
    assert line.get("x") == "10.000"
    assert line.get("y") == "16.000"
    ls = 0.02 * 10.0 * MM_PER_PT
    assert line.get("letter-spacing") == _f(ls)
    adv = metrics_for("Adobe Caslon", "regular").advance_em(" ")
    ws = 0.1 * adv * 10.0 * MM_PER_PT
    assert line.get("word-spacing") == _f(ws)
    assert line.text == "hello & <world>"


def test_default_spacing_attrs_omitted():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="text", layer="content", x=0, y=0, w=10, h=10,
              role="body",
              font={"family": "Akkurat", "weight": "regular",
                    "size": 9.0, "leading": 11.0},
              lines=(PlacedLine(text="plain", x=1.0, y=2.0, width=5.0),))])
    svg = render_page_svg(page, settings_ns())
    root = ET.fromstring(svg)
    line = list(next(k for k in root if k.tag == f"{SVG}g"))[0]
    assert line.get("letter-spacing") is None
    assert line.get("word-spacing") is None


def test_anchor_and_rotation():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="header", layer="furniture", x=120.0, y=100.0,
              w=0.0, h=0.0, text="side head", align="centre", rotation=90.0,
              font={"family": "Akkurat", "weight": "regular",
                    "size": 8.0, "leading": 9.6})])
    svg = render_page_svg(page, settings_ns())
    root = ET.fromstring(svg)
    t = next(k for k in root if k.tag == f"{SVG}text")
    assert t.get("text-anchor") == "middle"
    assert t.get("transform") == "rotate(90.000 120.000 100.000)"


def test_emphasis_spans_become_tspans():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="text", layer="content", x=0, y=0, w=40, h=10,
              role="body",
              font={"family": "Adobe Caslon", "weight": "regular",
                    "size": 10.0, "leading": 12.0},
              lines=(PlacedLine(text="an italic stretch", x=0, y=5,
                                width=30.0,
                                spans=((3, 9, True, False, False),)),))])
    svg = render_page_svg(page, settings_ns())
    assert '<tspan font-style="italic">italic</tspan>' in svg
    root = ET.fromstring(svg)  # still well-formed
    line = list(next(k for k in root if k.tag == f"{SVG}g"))[0]
    assert "".join(line.itertext()) == "an italic stretch"


def test_bold_font_weight_attr():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="text", layer="content", x=0, y=0, w=40, h=10,
              role="title3",
              font={"family": "Adobe Caslon", "weight": "bold",
                    "size": 10.0, "leading": 12.0},
              lines=(PlacedLine(text="Small Heading", x=0, y=5,
                                width=28.0),))])
    root = ET.fromstring(render_page_svg(page, settings_ns()))
    g = next(k for k in root if k.tag == f"{SVG}g")
    assert g.get("font-weight") == "bold"
    assert g.get("font-size") == _f(10.0 * MM_PER_PT)


def test_image_embedded_as_data_uri(tmp_path):
    from PIL import Image
    file = tmp_path / "plate.png"
    Image.new("RGB", (8, 6), (10, 200, 90)).save(file)
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="image", layer="content", x=10, y=10, w=40, h=30,
              role="image", src=str(file))])
    svg = render_page_svg(page, settings_ns())
    assert "data:image/png;base64," in svg
    root = ET.fromstring(svg)
    img = next(k for k in root if k.tag == f"{SVG}image")
    assert img.get("width") == "40.000"


def test_missing_image_draws_placeholder():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="image", layer="content", x=10, y=10, w=40, h=30,
              role="image", src="/nowhere/ghost.png")])
    svg = render_page_svg(page, settings_ns())
    assert "data:" not in svg
    assert "ghost.png" in svg


def test_gradient_goes_to_defs():
    page = Page(index=0, side="recto", kind="body", number=1, frames=[
        Frame(kind="decor", layer="background", x=0, y=0, w=12, h=200,
              role="innerMarginGradient",
              gradient={"start": [0, 40, 80, 0], "end": [0, 0, 0, 0],
                        "x1": 0.0, "y1": 0.0, "x2": 1.0, "y2": 0.0})])
    svg = render_page_svg(page, settings_ns(), "p0")
    root = ET.fromstring(svg)
    defs = next(k for k in root if k.tag == f"{SVG}defs")
    grad = list(defs)[0]
    assert grad.tag == f"{SVG}linearGradient"
    stops = list(grad)
    assert stops[0].get("stop-color") == "rgb(255,153,51)"
    assert stops[1].get("stop-color") == "rgb(255,255,255)"
    rect = next(k for k in root if k.tag == f"{SVG}rect"
                and k.get("fill", "").startswith("url("))
    assert rect.get("fill") == f'url(#{grad.get("id")})'


def test_every_interior_page_renders(small_doc, rules):
    _, s, doc = small_doc
    svgs = render_svg(doc)
    assert len(svgs) == len(doc.pages)
    for svg in svgs:
        root = ET.fromstring(svg)
        assert root.get("viewBox") == "0 0 130 200"


# -- canonical layout file -----------------------------------------------------

def test_layout_json_is_valid_json(small_doc):
    _, s, doc = small_doc
    text = write_layout_json(doc)
    data = json.loads(text)
    assert data["pageCount"] == len(doc.pages)
    assert data["settings"]["page"] == {"w": 130.0, "h": 200.0}
    assert data["title"] == doc.title
    assert data["coverFront"]["kind"] == "cover"


def test_layout_floats_on_thousandth_grid(small_doc):
    import re
    _, _, doc = small_doc
    text = write_layout_json(doc)
    for m in re.finditer(r'"[xywh]":(-?\d+\.\d+)', text):
        assert len(m.group(1).split(".")[1]) == 3


def test_layout_bytes_reproducible(small_doc, rules):
    ms, s, _ = small_doc
    a = write_layout_json(paginate(ms, s, rules))
    b = write_layout_json(paginate(ms, s, rules))
    assert a == b


def test_layout_read_write_fixpoint(small_doc):
    _, _, doc = small_doc
    once = write_layout_json(doc)
    again = write_layout_json(read_layout_json(once))
    assert once == again


def test_rotation_survives_round_trip(small_doc):
    _, _, doc = small_doc
    back = read_layout_json(write_layout_json(doc))
    rotated = [f for p in doc.pages for f in p.frames if f.rotation]
    restored = [f for p in back.pages for f in p.frames if f.rotation]
    assert len(restored) == len(rotated)


# -- output tree ------------------------------------------------------------------

def test_write_outputs_tree(small_doc, tmp_path):
    _, s, doc = small_doc
    out = tmp_path / "book"
    written = write_outputs(doc, str(out))
    names = {p.relative_to(out).as_posix() for p in out.rglob("*")
             if p.is_file()}
    assert "settings.json" in names
    assert "layout.json" in names
    assert "fontmap.json" in names
    assert "cover-front.svg" in names
    assert "cover-back.svg" in names
    page_files = sorted(n for n in names if n.startswith("pages/"))
    assert len(page_files) == len(doc.pages)
    assert page_files[0] == "pages/page-0001.svg"
    assert len(written) == len(names)
    settings = json.loads((out / "settings.json").read_text())
    assert settings["page"] == {"w": 130.0, "h": 200.0}


def test_write_outputs_without_covers(small_doc, tmp_path):
    _, s, doc = small_doc
    bare = LayoutDocument(settings=doc.settings, pages=doc.pages,
                          title=doc.title, author=doc.author,
                          language=doc.language)
    write_outputs(bare, str(tmp_path / "bare"))
    names = {p.name for p in (tmp_path / "bare").rglob("*") if p.is_file()}
    assert "cover-front.svg" not in names
