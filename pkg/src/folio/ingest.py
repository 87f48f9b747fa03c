"""Manuscript parsing, content classification and title hierarchy.

The manuscript format is plain UTF-8 text:
    * an optional front-matter block of `key: value` lines (title,
      author, language) terminated by a blank line;
    * `#`-prefixed heading lines, more hashes meaning less prominent;
    * `@name@` tags referencing an image file `name.*` in the image
      directory, either on their own line or inline in a paragraph;
    * `*italic*` and `**bold**` emphasis spans inside paragraphs.

Classification splits content into the four book types. The word-count
boundary is 50,000 words; image-dominated content (fewer than 50 words
per image) is treated as an image book regardless of total length.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace

WORDS_LONG_READING = 50_000
WORDS_PER_IMAGE_ONLY = 50

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".gif", ".webp", ".bmp")


class ManuscriptError(ValueError):
    pass


@dataclass(frozen=True)
class Run:
    text: str
    italic: bool = False
    bold: bool = False
    small_caps: bool = False


@dataclass(frozen=True)
class Paragraph:
    runs: tuple
    style: str = "body"

    @property
    def text(self) -> str:
        return "".join(r.text for r in self.runs)


@dataclass(frozen=True)
class Heading:
    text: str
    prominence: int
    level: int = 0  # resolved to 1..3 by assign_heading_levels


@dataclass(frozen=True)
class ImageRef:
    name: str
    path: str
    width: int
    height: int
    caption: str


@dataclass(frozen=True)
class Manuscript:
    blocks: tuple
    title: str = ""
    author: str = ""
    language: str = "en"


@dataclass(frozen=True)
class ContentStats:
    word_count: int
    image_count: int
    words_per_image: float
    book_type: str


_FRONT_KEY = re.compile(r"^([A-Za-z][A-Za-z0-9_-]*):\s*(.*)$")
_HEADING = re.compile(r"^(#{1,6})\s+(.*)$")
_IMAGE_TAG = re.compile(r"@([A-Za-z0-9_.-]+)@")
_EMPHASIS = re.compile(r"(\*\*[^*]+\*\*|\*[^*]+\*)")


def _caption_from_name(name: str) -> str:
    stem = os.path.splitext(name)[0]
    words = re.sub(r"[-_]+", " ", stem).strip()
    return words[:1].upper() + words[1:] if words else name


def _image_dimensions(path: str):
    from PIL import Image
    with Image.open(path) as im:
        return im.size


def _resolve_image(name: str, image_dir: str) -> ImageRef:
    if not image_dir:
        raise ManuscriptError(f"image '{name}' not found (no image directory)")
    candidates = []
    base = os.path.splitext(name)[0]
    if os.path.splitext(name)[1]:
        candidates.append(os.path.join(image_dir, name))
    for ext in IMAGE_EXTENSIONS:
        candidates.append(os.path.join(image_dir, base + ext))
    for cand in candidates:
        if os.path.isfile(cand):
            try:
                w, h = _image_dimensions(cand)
            except OSError as exc:
                raise ManuscriptError(f"image '{name}' unreadable: {exc}") from exc
            if w <= 0 or h <= 0:
                raise ManuscriptError(f"image '{name}' has no pixels")
            return ImageRef(name=base, path=cand, width=w, height=h,
                            caption=_caption_from_name(base))
    raise ManuscriptError(f"image '{name}' not found")


def _parse_runs(text: str) -> tuple:
    runs = []
    pos = 0
    for m in _EMPHASIS.finditer(text):
        if m.start() > pos:
            runs.append(Run(text[pos:m.start()]))
        token = m.group(0)
        if token.startswith("**"):
            runs.append(Run(token[2:-2], bold=True))
        else:
            runs.append(Run(token[1:-1], italic=True))
        pos = m.end()
    if pos < len(text):
        runs.append(Run(text[pos:]))
    return tuple(r for r in runs if r.text)


def _split_paragraph(text: str, image_dir: str, blocks: list):
    """Split a paragraph on inline image tags, appending fragments and
    ImageRef blocks in source order."""
    pos = 0
    for m in _IMAGE_TAG.finditer(text):
        before = text[pos:m.start()].strip()
        if before:
            blocks.append(Paragraph(runs=_parse_runs(before)))
        blocks.append(_resolve_image(m.group(1), image_dir))
        pos = m.end()
    rest = text[pos:].strip()
    if rest:
        blocks.append(Paragraph(runs=_parse_runs(rest)))


def parse_manuscript(source: str, image_dir: str = "") -> Manuscript:
    """Parse manuscript text into an ordered block list."""
    if not source or not source.strip():
        raise ManuscriptError("empty manuscript")

    lines = source.splitlines()
    meta = {}
    i = 0
    if lines and _FRONT_KEY.match(lines[0]):
        while i < len(lines) and lines[i].strip():
            m = _FRONT_KEY.match(lines[i])
            if not m:
                break
            meta[m.group(1).lower()] = m.group(2).strip()
            i += 1

    blocks: list = []
    para_lines: list = []

    def flush():
        if para_lines:
            _split_paragraph(" ".join(para_lines), image_dir, blocks)
            para_lines.clear()

    for line in lines[i:]:
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        hm = _HEADING.match(stripped)
        if hm:
            flush()
            blocks.append(Heading(text=hm.group(2).strip(),
                                  prominence=7 - len(hm.group(1))))
            continue
        para_lines.append(stripped)
    flush()

    if not blocks:
        raise ManuscriptError("empty manuscript")

    ms = Manuscript(blocks=tuple(blocks),
                    title=meta.get("title", ""),
                    author=meta.get("author", ""),
                    language=meta.get("language", "en") or "en")
    return assign_heading_levels(ms)


def serialize_manuscript(ms: Manuscript) -> str:
    """Inverse of parse_manuscript for storage and round-trip tests."""
    out = []
    front = []
    if ms.title:
        front.append(f"title: {ms.title}")
    if ms.author:
        front.append(f"author: {ms.author}")
    if ms.language and ms.language != "en":
        front.append(f"language: {ms.language}")
    if front:
        out.extend(front)
        out.append("")
    for block in ms.blocks:
        if isinstance(block, Heading):
            out.append("#" * (7 - block.prominence) + " " + block.text)
        elif isinstance(block, ImageRef):
            out.append(f"@{block.name}@")
        else:
            parts = []
            for r in block.runs:
                if r.bold:
                    parts.append(f"**{r.text}**")
                elif r.italic:
                    parts.append(f"*{r.text}*")
                else:
                    parts.append(r.text)
            out.append("".join(parts))
        out.append("")
    return "\n".join(out).rstrip() + "\n"


def assign_heading_levels(ms: Manuscript) -> Manuscript:
    """Map distinct prominences, most prominent first, onto levels 1..3.
    Prominences past the third collapse to level 3."""
    prominences = sorted({b.prominence for b in ms.blocks
                          if isinstance(b, Heading)}, reverse=True)
    level_of = {}
    for rank, p in enumerate(prominences):
        level_of[p] = min(rank + 1, 3)
    blocks = tuple(
        replace(b, level=level_of[b.prominence]) if isinstance(b, Heading) else b
        for b in ms.blocks)
    return replace(ms, blocks=blocks)


def word_count(ms: Manuscript) -> int:
    total = 0
    for block in ms.blocks:
        if isinstance(block, Paragraph):
            total += len(block.text.split())
        elif isinstance(block, Heading):
            total += len(block.text.split())
    return total


def classify(ms: Manuscript, rules=None) -> ContentStats:
    """Pure function of (word count, image count)."""
    words = word_count(ms)
    images = sum(1 for b in ms.blocks if isinstance(b, ImageRef))
    ratio = (words / images) if images else float("inf")
    if images >= 1 and ratio < WORDS_PER_IMAGE_ONLY:
        book_type = "only_images"
    elif words >= WORDS_LONG_READING:
        book_type = "long_reading"
    elif images >= 1:
        book_type = "text_and_images"
    else:
        book_type = "short_reading"
    return ContentStats(word_count=words, image_count=images,
                        words_per_image=ratio, book_type=book_type)
