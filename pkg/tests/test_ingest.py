"""Manuscript parsing, heading hierarchy, classification boundaries."""

import pytest
from PIL import Image

from folio.ingest import (Heading, ImageRef, Manuscript, ManuscriptError,
                          Paragraph, Run, assign_heading_levels, classify,
                          parse_manuscript, serialize_manuscript, word_count)

from corpus import make_image_dir, manuscript_source


def make_png(path, size=(40, 30)):
    Image.new("RGB", size, (200, 10, 10)).save(path)


@pytest.fixture()
def image_dir(tmp_path):
    d = tmp_path / "img"
    d.mkdir()
    make_png(d / "mill.png")
    make_png(d / "old-stone_bridge.jpg", size=(64, 48))
    return str(d)


# -- front matter ------------------------------------------------------------

def test_front_matter_parsed():
    ms = parse_manuscript("title: A Quiet Year\nauthor: N. Author\n"
                          "language: pt\n\nBody text here.\n")
    assert ms.title == "A Quiet Year"
    assert ms.author == "N. Author"
    assert ms.language == "pt"
    assert len(ms.blocks) == 1


def test_front_matter_optional():
    ms = parse_manuscript("Just a paragraph.\n")
    assert ms.title == "" and ms.author == "" and ms.language == "en"


def test_front_matter_needs_leading_key_line():
    # the block only exists when the very first line is a key: value pair
    ms = parse_manuscript("Opening line of prose.\n\ntitle: not metadata\n")
    assert ms.title == ""
    assert len(ms.blocks) == 2


def test_empty_language_defaults_to_english():
    ms = parse_manuscript("title: T\nlanguage:\n\nText.\n")
    assert ms.language == "en"


def test_empty_manuscript_rejected():
    with pytest.raises(ManuscriptError):
        parse_manuscript("")
    with pytest.raises(ManuscriptError):
        parse_manuscript("   \n\n  \n")
    with pytest.raises(ManuscriptError):
        parse_manuscript("title: only metadata\n")


# -- paragraphs and emphasis ---------------------------------------------------

def test_paragraph_lines_join_with_spaces():
    ms = parse_manuscript("One line\nwraps onto\nthe next.\n\nSecond para.\n")
    assert len(ms.blocks) == 2
    assert ms.blocks[0].text == "One line wraps onto the next."
    assert ms.blocks[1].text == "Second para."


def test_emphasis_runs():
    ms = parse_manuscript("Plain *slanted words* then **heavy ones** end.\n")
    runs = ms.blocks[0].runs
    assert [(r.text, r.italic, r.bold) for r in runs] == [
        ("Plain ", False, False),
        ("slanted words", True, False),
        (" then ", False, False),
        ("heavy ones", False, True),
        (" end.", False, False)]
    assert ms.blocks[0].text == "Plain slanted words then heavy ones end."


def test_heading_prominence():
    ms = parse_manuscript("# Part\n\n## Chapter\n\n###### Fine print\n\nBody.\n")
    heads = [b for b in ms.blocks if isinstance(b, Heading)]
    assert [h.prominence for h in heads] == [6, 5, 1]


def test_heading_levels_rank_by_prominence():
    ms = parse_manuscript("## Chapter\n\nText.\n\n#### Section\n\nText.\n\n"
                          "## Another\n\nText.\n")
    heads = [b for b in ms.blocks if isinstance(b, Heading)]
    assert [h.level for h in heads] == [1, 2, 1]


def test_heading_levels_collapse_past_three():
    src = "\n\n".join(f"{'#' * n} H{n}\n\np" for n in range(1, 6))
    ms = parse_manuscript(src)
    heads = [b for b in ms.blocks if isinstance(b, Heading)]
    assert [h.level for h in heads] == [1, 2, 3, 3, 3]


def test_assign_heading_levels_idempotent():
    ms = parse_manuscript("# A\n\n## B\n\nText.\n")
    assert assign_heading_levels(ms) == ms


# -- images --------------------------------------------------------------------

def test_image_block_resolved(image_dir):
    ms = parse_manuscript("Intro.\n\n@mill@\n\nOutro.\n", image_dir)
    kinds = [type(b).__name__ for b in ms.blocks]
    assert kinds == ["Paragraph", "ImageRef", "Paragraph"]
    img = ms.blocks[1]
    assert img.name == "mill"
    assert (img.width, img.height) == (40, 30)
    assert img.caption == "Mill"


def test_image_caption_from_filename(image_dir):
    ms = parse_manuscript("@old-stone_bridge@\n\nText.\n", image_dir)
    assert ms.blocks[0].caption == "Old stone bridge"
    assert ms.blocks[0].width == 64


def test_inline_image_splits_paragraph(image_dir):
    ms = parse_manuscript("Before the picture @mill@ and after it.\n",
                          image_dir)
    assert [type(b).__name__ for b in ms.blocks] == \
        ["Paragraph", "ImageRef", "Paragraph"]
    assert ms.blocks[0].text == "Before the picture"
    assert ms.blocks[2].text == "and after it."


def test_image_with_extension(image_dir):
    ms = parse_manuscript("@old-stone_bridge.jpg@\n\nText.\n", image_dir)
    assert ms.blocks[0].name == "old-stone_bridge"


def test_missing_image_rejected(image_dir):
    with pytest.raises(ManuscriptError):
        parse_manuscript("@no-such-image@\n\nText.\n", image_dir)


def test_image_without_directory_rejected():
    with pytest.raises(ManuscriptError):
        parse_manuscript("@mill@\n\nText.\n")


def test_unreadable_image_rejected(tmp_path):
    d = tmp_path / "img"
    d.mkdir()
    (d / "broken.png").write_bytes(b"not a png at all")
    with pytest.raises(ManuscriptError):
        parse_manuscript("@broken@\n\nText.\n", str(d))


# -- word counting and classification -------------------------------------------

def para(n):
    return Paragraph(runs=(Run(" ".join(["word"] * n)),))


def imgs(n):
    return tuple(ImageRef(name=f"i{k}", path="", width=10, height=10,
                          caption="") for k in range(n))


def test_word_count_includes_headings():
    ms = parse_manuscript("# Two words\n\nThree more words.\n")
    assert word_count(ms) == 5


def test_long_reading_boundary():
    assert classify(Manuscript(blocks=(para(49_999),))).book_type == \
        "short_reading"
    assert classify(Manuscript(blocks=(para(50_000),))).book_type == \
        "long_reading"


def test_image_ratio_boundary():
    # 99 words over 2 images is 49.5 words per image: image book
    ms = Manuscript(blocks=(para(99),) + imgs(2))
    assert classify(ms).book_type == "only_images"
    # exactly 50 words per image stays a text book
    ms = Manuscript(blocks=(para(100),) + imgs(2))
    assert classify(ms).book_type == "text_and_images"


def test_image_book_regardless_of_length():
    ms = Manuscript(blocks=(para(60_000),) + imgs(1_300))
    stats = classify(ms)
    assert stats.book_type == "only_images"
    assert stats.words_per_image == pytest.approx(60_000 / 1_300)


def test_long_reading_with_sparse_images():
    ms = Manuscript(blocks=(para(52_000),) + imgs(3))
    assert classify(ms).book_type == "long_reading"


def test_no_images_infinite_ratio():
    stats = classify(Manuscript(blocks=(para(10),)))
    assert stats.words_per_image == float("inf")
    assert stats.image_count == 0


# -- serialization round trip ---------------------------------------------------

def test_round_trip(image_dir):
    src = ("title: The Mill\nauthor: A. Writer\nlanguage: pt\n\n"
           "# First\n\nSome *quiet* prose with **weight** behind it.\n\n"
           "@mill@\n\n## Later\n\nMore text follows here.\n")
    ms = parse_manuscript(src, image_dir)
    again = parse_manuscript(serialize_manuscript(ms), image_dir)
    assert again == ms


def test_round_trip_without_front_matter():
    ms = parse_manuscript("Only a paragraph of plain prose.\n")
    assert parse_manuscript(serialize_manuscript(ms)) == ms


# -- generated corpus ------------------------------------------------------------

def test_corpus_word_budget_is_exact():
    src = manuscript_source(7, 9_000, chapters=6, sections_per_chapter=2)
    ms = parse_manuscript(src)
    assert word_count(ms) == 9_000
    assert classify(ms).book_type == "short_reading"


def test_corpus_long_reading():
    src = manuscript_source(11, 52_000, chapters=10)
    ms = parse_manuscript(src)
    assert word_count(ms) == 52_000
    assert classify(ms).book_type == "long_reading"


def test_corpus_with_images(tmp_path):
    names = ["plate-one", "plate-two", "plate-three"]
    make_image_dir(tmp_path / "img", names, seed=3)
    src = manuscript_source(13, 2_000, chapters=2, images=3,
                            image_names=names)
    ms = parse_manuscript(src, str(tmp_path / "img"))
    stats = classify(ms)
    assert stats.image_count == 3
    assert stats.book_type == "text_and_images"
