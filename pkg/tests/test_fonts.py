"""Font metrics: parsed advances against FreeType, sidecar format,
measurement arithmetic, family map resolution."""

import string

import pytest
from PIL import ImageFont

from folio.fonts import (FontError, data_path, default_fontmap, css_family,
                         family_class, load_font_file, load_font_metrics,
                         load_fontmap, load_sidecar, measure_run, metrics_for,
                         resolve_font_file)
from stubs import TableMetrics, UniformMetrics

CHARSET = (string.ascii_letters + string.digits + string.punctuation
           + " àâçéèêëîïôùûüñõœÀÉÇ")


def bundled_font_paths():
    fm = load_fontmap()
    paths = set()
    for files in fm["classes"].values():
        for weight in ("regular", "bold", "italic"):
            rel = files.get(weight)
            if rel:
                paths.add(data_path(*rel.split("/")))
    return sorted(paths)


@pytest.mark.parametrize("path", bundled_font_paths())
def test_advances_match_freetype(path):
    """Every parsed advance agrees with an independent rasterizer.

    At a pixel size equal to unitsPerEm one font unit is one pixel, so
    getlength returns the raw advance up to hinting rounding.
    """
    m = load_font_file(path)
    ft = ImageFont.truetype(path, m.units_per_em)
    for ch in CHARSET:
        ours = m.advance_em(ch)
        theirs = ft.getlength(ch) / m.units_per_em
        assert ours == pytest.approx(theirs, abs=2e-3), (path, ch)


def test_word_width_is_sum_of_advances(serif_metrics):
    word = "Typography"
    assert serif_metrics.word_width_em(word) == pytest.approx(
        sum(serif_metrics.advance_em(c) for c in word))


def test_unmapped_codepoint_uses_fallback(serif_metrics):
    m = serif_metrics
    cp = next(c for c in range(0x380, 0x2000) if c not in m._cmap)
    assert m.advance_em(chr(cp)) == m.fallback_advance / m.units_per_em


def test_bundled_fonts_have_sane_metrics():
    for path in bundled_font_paths():
        m = load_font_file(path)
        assert m.units_per_em > 0
        assert 0.1 < m.advance_em(" ") < 0.6
        assert 0.2 < m.advance_em("n") < 1.0


# -- measurement -----------------------------------------------------------

def test_measure_run_formula():
    m = TableMetrics({"a": 0.5, "b": 0.6, " ": 0.25, "c": 0.45, "d": 0.55})
    # 0.5 + 0.6 + 0.25*1.2 + 0.45 + 0.55 + 4 gaps * 0.01, all times 10
    got = measure_run("ab cd", m, 10.0, letter_spacing=0.01, word_spacing=1.2)
    assert got == pytest.approx(24.4)


def test_measure_run_empty_and_single():
    m = UniformMetrics(0.5)
    assert measure_run("", m, 12.0) == 0.0
    # one glyph has no inter-glyph gap
    assert measure_run("a", m, 12.0, letter_spacing=0.2) == pytest.approx(6.0)


def test_measure_run_scales_linearly():
    m = UniformMetrics(0.5)
    w10 = measure_run("hello", m, 10.0)
    w20 = measure_run("hello", m, 20.0)
    assert w20 == pytest.approx(2 * w10)


def test_word_spacing_only_touches_spaces():
    m = UniformMetrics(0.5)
    tight = measure_run("a b", m, 10.0, word_spacing=0.8)
    wide = measure_run("a b", m, 10.0, word_spacing=1.2)
    assert wide - tight == pytest.approx(0.5 * 0.4 * 10.0)
    assert measure_run("ab", m, 10.0, word_spacing=0.8) == \
        measure_run("ab", m, 10.0, word_spacing=1.2)


def test_negative_letter_spacing_shrinks():
    m = UniformMetrics(0.5)
    assert measure_run("abcd", m, 10.0, letter_spacing=-0.05) == \
        pytest.approx(0.5 * 4 * 10.0 - 3 * 0.05 * 10.0)


# -- sidecar format ----------------------------------------------------------

def write_sidecar(tmp_path, body):
    p = tmp_path / "metrics.txt"
    p.write_text(body, encoding="utf-8")
    return str(p)


def test_sidecar_basic(tmp_path):
    path = write_sidecar(tmp_path, """\
# hand-made metrics
unitsPerEm 1000
default 520
65 600   # A
66 640
""")
    m = load_sidecar(path, "Hand")
    assert m.family == "Hand"
    assert m.units_per_em == 1000
    assert m.advance_em("A") == pytest.approx(0.6)
    assert m.advance_em("B") == pytest.approx(0.64)
    assert m.advance_em("Z") == pytest.approx(0.52)  # default fallback


def test_sidecar_default_falls_back_to_half_em(tmp_path):
    path = write_sidecar(tmp_path, "unitsPerEm 2000\n65 900\n")
    m = load_sidecar(path)
    assert m.advance_em("A") == pytest.approx(0.45)
    assert m.advance_em("Q") == pytest.approx(0.5)


def test_sidecar_requires_units_per_em(tmp_path):
    path = write_sidecar(tmp_path, "65 600\n66 640\n")
    with pytest.raises(FontError):
        load_sidecar(path)


def test_sidecar_rejects_zero_units(tmp_path):
    path = write_sidecar(tmp_path, "unitsPerEm 0\n65 600\n")
    with pytest.raises(FontError):
        load_sidecar(path)


def test_dispatch_on_magic(tmp_path):
    ttf = bundled_font_paths()[0]
    assert load_font_metrics(ttf).units_per_em > 0
    sidecar = write_sidecar(tmp_path, "unitsPerEm 1000\n65 500\n")
    m = load_font_metrics(sidecar)
    assert m.advance_em("A") == pytest.approx(0.5)


def test_load_font_file_rejects_junk(tmp_path):
    bad = tmp_path / "junk.ttf"
    bad.write_bytes(b"GIF89a" + b"\x00" * 64)
    with pytest.raises(FontError):
        load_font_file(str(bad))
    short = tmp_path / "short.ttf"
    short.write_bytes(b"\x00\x01")
    with pytest.raises(FontError):
        load_font_file(str(short))


# -- family map --------------------------------------------------------------

def test_family_classes(rules):
    assert family_class("Adobe Caslon") == "serif"
    assert family_class("Akkurat") == "sans"
    fm = default_fontmap()
    assert family_class("No Such Family") == fm["fallbackClass"]


def test_every_pairing_slot_resolves_and_loads(rules):
    for p in rules.pairings:
        for slot in (p.title, p.body):
            path = resolve_font_file(slot.family, slot.weight)
            m = metrics_for(slot.family, slot.weight)
            assert m.units_per_em > 0
            assert path.endswith((".ttf", ".otf"))


def test_pairing_body_class_matches_fontmap(rules):
    for p in rules.pairings:
        assert family_class(p.body.family) == p.body_class


def test_unknown_weight_falls_back_to_regular():
    assert resolve_font_file("Akkurat", "blackcondensed") == \
        resolve_font_file("Akkurat", "regular")


def test_metrics_cache_returns_same_object():
    a = metrics_for("Adobe Caslon", "regular")
    b = metrics_for("Adobe Caslon", "regular")
    assert a is b


def test_css_family_nonempty():
    assert css_family("Adobe Caslon")
    assert css_family("Akkurat")
    assert css_family("Adobe Caslon") != css_family("Akkurat")


def test_fontmap_missing_key_raises(tmp_path):
    bad = tmp_path / "fontmap.json"
    bad.write_text('{"classes": {}, "families": {}}')
    with pytest.raises(FontError):
        load_fontmap(str(bad))
