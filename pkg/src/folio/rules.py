"""Editable rule base: ranges, weights and style options for every
typographic decision the generator makes.

Responsibilities:
    * load the rule file (JSON) and validate every invariant it must hold;
    * expose an immutable RuleSet shared safely across generation jobs.

Key types:
    RuleSet      immutable, validated rule base
    SizeOption   page format with per-book-type selection weights
    FontPairing  title/body face combination with leading ratio
    HeaderLayout running header and page number placement descriptor

The default rule file ships in folio/data/rules.json. The FOLIO_RULES
environment variable (honored by the CLI and server) points at a
replacement file with the same schema.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources

BOOK_TYPES = ("long_reading", "short_reading", "text_and_images", "only_images")

FEATURE_NAMES = ("halfPageBackground", "marginGradient", "randomIndent",
                 "maxCoverTitle")


class RuleError(ValueError):
    """Raised when a rule file fails validation. `errors` lists every
    problem with its field path."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Range:
    min: float
    max: float

    def contains(self, v: float) -> bool:
        return self.min <= v <= self.max

    def clamp(self, v: float) -> float:
        return min(self.max, max(self.min, v))

    def normalize(self, v: float) -> float:
        if self.max == self.min:
            return 0.0
        return (v - self.min) / (self.max - self.min)


@dataclass(frozen=True)
class SizeOption:
    id: str
    width: float
    height: float
    orientation: str
    weights: dict  # book type -> non-negative weight


@dataclass(frozen=True)
class FontSlot:
    family: str
    weight: str  # regular | bold | italic


@dataclass(frozen=True)
class FontPairing:
    id: str
    title: FontSlot
    body: FontSlot
    leading: float
    book_types: tuple
    body_class: str  # serif | sans


@dataclass(frozen=True)
class HeaderLayout:
    id: str
    header: dict       # {edge, align, rotation}
    page_number: dict  # {edge, align}


@dataclass(frozen=True)
class CoverColor:
    name: str
    cmyk: tuple


@dataclass(frozen=True)
class RuleSet:
    sizes: tuple
    margins: dict           # top/bottom/inside/outside -> Range
    column_width: Range
    gutter: Range
    line_length: dict       # min/ideal/max/justifiedMin
    page_capacity: dict     # oneColumn/multiColumn
    font_size: Range
    leading: Range
    leading_base: float
    word_spacing: Range
    word_spacing_ideal: float
    letter_spacing: Range
    letter_spacing_ideal: float
    alignments: dict        # body per book type, titles, captions
    paragraph_marks: tuple
    header_layouts: tuple
    pairings: tuple
    cover_colors: tuple
    feature_probability: float
    raw: dict = field(repr=False, compare=False, default=None)

    # -- lookups ---------------------------------------------------------

    def size_by_id(self, sid: str):
        for s in self.sizes:
            if s.id == sid:
                return s
        return None

    def pairing_by_id(self, pid: str):
        for p in self.pairings:
            if p.id == pid:
                return p
        return None

    def header_layout_by_id(self, hid: str):
        for h in self.header_layouts:
            if h.id == hid:
                return h
        return None

    def pairings_for(self, book_type: str):
        return tuple(p for p in self.pairings if book_type in p.book_types)


def default_rules_path() -> str:
    return str(resources.files("folio").joinpath("data", "rules.json"))


def resolve_rules_path(explicit: str | None = None) -> str:
    """Explicit path wins, then FOLIO_RULES, then the bundled default."""
    if explicit:
        return explicit
    env = os.environ.get("FOLIO_RULES")
    if env:
        return env
    return default_rules_path()


def _range(errors, data, path, lo_key=0, hi_key=1) -> Range:
    try:
        lo, hi = float(data[lo_key]), float(data[hi_key])
    except (KeyError, IndexError, TypeError, ValueError):
        errors.append(f"{path}: expected a [min, max] pair")
        return Range(0.0, 0.0)
    if lo > hi:
        errors.append(f"{path}: min {lo} exceeds max {hi}")
    return Range(lo, hi)


def validate_rules(data: dict) -> list:
    """Return a list of human-readable errors, empty when valid."""
    errors = []
    required = ["sizes", "margins", "columns", "lineLength", "pageCapacity",
                "fontSize", "leading", "wordSpacing", "letterSpacing",
                "alignments", "paragraphMarks", "headerLayouts", "pairings",
                "coverColors", "featureProbability"]
    for key in required:
        if key not in data:
            errors.append(f"{key}: missing")
    if errors:
        return errors

    for i, s in enumerate(data["sizes"]):
        path = f"sizes[{i}]"
        w, h = s.get("width"), s.get("height")
        if not (isinstance(w, (int, float)) and isinstance(h, (int, float))
                and w > 0 and h > 0):
            errors.append(f"{path}: width/height must be positive numbers")
            continue
        expected = "portrait" if h > w else ("square" if h == w else "landscape")
        if s.get("orientation") != expected:
            errors.append(f"{path}.orientation: {s.get('orientation')!r} "
                          f"inconsistent with {w}x{h}")
        weights = s.get("weights", {})
        for bt in BOOK_TYPES:
            if weights.get(bt, 0) < 0:
                errors.append(f"{path}.weights.{bt}: negative")
    for bt in BOOK_TYPES:
        total = sum(s.get("weights", {}).get(bt, 0) for s in data["sizes"])
        if total <= 0:
            errors.append(f"sizes: weights for {bt} must sum to a positive number")

    for side in ("top", "bottom", "inside", "outside"):
        if side not in data["margins"]:
            errors.append(f"margins.{side}: missing")
        else:
            _range(errors, data["margins"][side], f"margins.{side}")

    _range(errors, data["columns"].get("widthRange", []), "columns.widthRange")
    _range(errors, data["columns"].get("gutterRange", []), "columns.gutterRange")

    ll = data["lineLength"]
    if not (ll.get("min", 0) <= ll.get("ideal", 0) <= ll.get("max", 0)):
        errors.append("lineLength: ideal must lie within [min, max]")
    if not (ll.get("min", 0) <= ll.get("justifiedMin", 0) <= ll.get("max", 0)):
        errors.append("lineLength.justifiedMin: outside [min, max]")

    for key in ("oneColumn", "multiColumn"):
        if data["pageCapacity"].get(key, 0) <= 0:
            errors.append(f"pageCapacity.{key}: must be positive")

    fs = _range(errors, [data["fontSize"].get("min"), data["fontSize"].get("max")],
                "fontSize")
    lead = _range(errors, [data["leading"].get("min"), data["leading"].get("max")],
                  "leading")
    if not lead.contains(data["leading"].get("base", 0)):
        errors.append("leading.base: outside range")
    ws = _range(errors, [data["wordSpacing"].get("min"), data["wordSpacing"].get("max")],
                "wordSpacing")
    if not ws.contains(data["wordSpacing"].get("ideal", 0)):
        errors.append("wordSpacing.ideal: outside range")
    ls = _range(errors, [data["letterSpacing"].get("min"), data["letterSpacing"].get("max")],
                "letterSpacing")
    if not ls.contains(data["letterSpacing"].get("ideal", 1)):
        errors.append("letterSpacing.ideal: outside range")

    align = data["alignments"]
    body = align.get("body", {})
    for bt in BOOK_TYPES:
        opts = body.get(bt, [])
        if not opts:
            errors.append(f"alignments.body.{bt}: empty")
        for a in opts:
            if a not in ("justified", "left"):
                errors.append(f"alignments.body.{bt}: unknown alignment {a!r}")
    for a in align.get("titles", []):
        if a not in ("left", "centre"):
            errors.append(f"alignments.titles: unknown alignment {a!r}")
    for a in align.get("captions", []):
        if a not in ("left", "right"):
            errors.append(f"alignments.captions: unknown alignment {a!r}")

    if not data["paragraphMarks"]:
        errors.append("paragraphMarks: empty")

    seen = set()
    for i, h in enumerate(data["headerLayouts"]):
        hid = h.get("id")
        if not hid:
            errors.append(f"headerLayouts[{i}].id: missing")
        elif hid in seen:
            errors.append(f"headerLayouts[{i}].id: duplicate {hid!r}")
        seen.add(hid)
        if "header" not in h or "pageNumber" not in h:
            errors.append(f"headerLayouts[{i}]: needs header and pageNumber")

    seen = set()
    for i, p in enumerate(data["pairings"]):
        path = f"pairings[{i}]"
        pid = p.get("id")
        if not pid:
            errors.append(f"{path}.id: missing")
        elif pid in seen:
            errors.append(f"{path}.id: duplicate {pid!r}")
        seen.add(pid)
        types = p.get("bookTypes", [])
        if not types:
            errors.append(f"{path}.bookTypes: at least one book type required")
        for bt in types:
            if bt not in BOOK_TYPES:
                errors.append(f"{path}.bookTypes: unknown type {bt!r}")
        if not lead.contains(p.get("leading", 0)):
            errors.append(f"{path}.leading: {p.get('leading')} outside "
                          f"[{lead.min}, {lead.max}]")
        if p.get("bodyClass") not in ("serif", "sans"):
            errors.append(f"{path}.bodyClass: must be serif or sans")
        elif "long_reading" in types and p["bodyClass"] != "serif":
            errors.append(f"{path}: long reading requires a serif body")

    for i, c in enumerate(data["coverColors"]):
        comps = c.get("cmyk", [])
        if len(comps) != 4 or any(not (0 <= v <= 100) for v in comps):
            errors.append(f"coverColors[{i}]: 4 components in [0, 100] required")

    prob = data["featureProbability"]
    if not (0 <= prob <= 1):
        errors.append("featureProbability: outside [0, 1]")

    return errors


def load_rules(path: str | None = None) -> RuleSet:
    """Load and validate a rule file. Raises RuleError listing every
    problem when the file is invalid."""
    actual = resolve_rules_path(path)
    with open(actual, encoding="utf-8") as f:
        data = json.load(f)
    return rules_from_dict(data)


def rules_from_dict(data: dict) -> RuleSet:
    errors = validate_rules(data)
    if errors:
        raise RuleError(errors)

    sizes = tuple(
        SizeOption(id=s["id"], width=float(s["width"]), height=float(s["height"]),
                   orientation=s["orientation"],
                   weights=dict(s.get("weights", {})))
        for s in data["sizes"])
    margins = {side: Range(float(data["margins"][side][0]),
                           float(data["margins"][side][1]))
               for side in ("top", "bottom", "inside", "outside")}
    pairings = tuple(
        FontPairing(id=p["id"],
                    title=FontSlot(p["title"]["family"], p["title"]["weight"]),
                    body=FontSlot(p["body"]["family"], p["body"]["weight"]),
                    leading=float(p["leading"]),
                    book_types=tuple(p["bookTypes"]),
                    body_class=p["bodyClass"])
        for p in data["pairings"])
    layouts = tuple(
        HeaderLayout(id=h["id"], header=dict(h["header"]),
                     page_number=dict(h["pageNumber"]))
        for h in data["headerLayouts"])
    colors = tuple(CoverColor(c.get("name", ""), tuple(c["cmyk"]))
                   for c in data["coverColors"])

    return RuleSet(
        sizes=sizes,
        margins=margins,
        column_width=Range(*map(float, data["columns"]["widthRange"])),
        gutter=Range(*map(float, data["columns"]["gutterRange"])),
        line_length=dict(data["lineLength"]),
        page_capacity=dict(data["pageCapacity"]),
        font_size=Range(float(data["fontSize"]["min"]), float(data["fontSize"]["max"])),
        leading=Range(float(data["leading"]["min"]), float(data["leading"]["max"])),
        leading_base=float(data["leading"]["base"]),
        word_spacing=Range(float(data["wordSpacing"]["min"]),
                           float(data["wordSpacing"]["max"])),
        word_spacing_ideal=float(data["wordSpacing"]["ideal"]),
        letter_spacing=Range(float(data["letterSpacing"]["min"]),
                             float(data["letterSpacing"]["max"])),
        letter_spacing_ideal=float(data["letterSpacing"]["ideal"]),
        alignments=data["alignments"],
        paragraph_marks=tuple(data["paragraphMarks"]),
        header_layouts=layouts,
        pairings=pairings,
        cover_colors=colors,
        feature_probability=float(data["featureProbability"]),
        raw=data,
    )
