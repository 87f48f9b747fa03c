"""Liang pattern hyphenation over bundled TeX-format pattern files.

Pattern files live in folio/data/hyphenation/<lang>.tex and use the
standard text format: a `\\patterns{...}` block of space-separated
patterns with inter-letter priority digits, and an optional
`\\hyphenation{...}` block of pre-hyphenated exception words.

Break positions never fall within two characters of either word end,
and words shorter than five characters are never hyphenated.
"""

from __future__ import annotations

import logging
import re
from importlib import resources

log = logging.getLogger("folio.hyphenate")

MIN_WORD_LENGTH = 5
LEFT_MIN = 2
RIGHT_MIN = 2

_POINTS_KEY = ""  # reserved trie key holding a node's priority tuple


def parse_pattern_file(path: str):
    """Return (trie, exceptions) for a TeX-format pattern file."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    text = re.sub(r"%[^\n]*", "", text)

    def block(name):
        m = re.search(r"\\" + name + r"\s*\{([^}]*)\}", text)
        return m.group(1).split() if m else []

    trie: dict = {}
    for pat in block("patterns"):
        chars = []
        points = [0]
        for ch in pat:
            if ch.isdigit():
                points[-1] = int(ch)
            else:
                chars.append(ch)
                points.append(0)
        node = trie
        for ch in chars:
            node = node.setdefault(ch, {})
        node[_POINTS_KEY] = tuple(points)

    exceptions = {}
    for word in block("hyphenation"):
        bare = word.replace("-", "")
        marks = []
        seen = 0
        for i, ch in enumerate(word):
            if ch == "-":
                marks.append(i - seen)
                seen += 1
        exceptions[bare] = tuple(marks)
    return trie, exceptions


class _Language:
    __slots__ = ("trie", "exceptions", "cache")

    def __init__(self, trie, exceptions):
        self.trie = trie
        self.exceptions = exceptions
        self.cache = {}


_languages: dict = {}
_warned: set = set()


def _normalize_tag(language: str) -> str:
    return language.split("-")[0].split("_")[0].lower().strip()


def _load_language(tag: str):
    if tag in _languages:
        return _languages[tag]
    res = resources.files("folio").joinpath("data", "hyphenation", f"{tag}.tex")
    try:
        path = str(res)
        trie, exceptions = parse_pattern_file(path)
    except (FileNotFoundError, OSError):
        _languages[tag] = None
        return None
    lang = _Language(trie, exceptions)
    _languages[tag] = lang
    return lang


def available_languages():
    folder = resources.files("folio").joinpath("data", "hyphenation")
    tags = []
    for entry in folder.iterdir():
        if entry.name.endswith(".tex"):
            tags.append(entry.name[:-4])
    return sorted(tags)


def hyphenation_points(word: str, language: str = "en") -> list:
    """Indices where `word` may break. Empty for short words and for
    languages without a bundled pattern file (logged once per tag)."""
    if len(word) < MIN_WORD_LENGTH:
        return []
    tag = _normalize_tag(language)
    lang = _load_language(tag)
    if lang is None:
        if tag not in _warned:
            _warned.add(tag)
            log.warning("no hyphenation patterns for language %r", tag)
        return []

    lower = word.lower()
    hit = lang.cache.get(lower)
    if hit is not None:
        return list(hit)

    exc = lang.exceptions.get(lower)
    if exc is not None:
        marks = [m for m in exc if LEFT_MIN <= m <= len(lower) - RIGHT_MIN]
    else:
        marks = _match(lower, lang.trie)
    lang.cache[lower] = tuple(marks)
    return marks


def _match(lower: str, trie: dict) -> list:
    dotted = "." + lower + "."
    n = len(lower)
    levels = [0] * (n + 1)
    for start in range(len(dotted) - 1):
        node = trie
        for depth in range(start, len(dotted)):
            node = node.get(dotted[depth])
            if node is None:
                break
            points = node.get(_POINTS_KEY)
            if points:
                # gap k of the pattern sits before undotted index start+k-1
                base = start - 1
                for k, v in enumerate(points):
                    pos = base + k
                    if 0 <= pos <= n and v > levels[pos]:
                        levels[pos] = v
    return [i for i in range(LEFT_MIN, n - RIGHT_MIN + 1) if levels[i] % 2 == 1]
