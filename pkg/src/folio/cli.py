"""Command line entry point.

Subcommands mirror the studio's tabs as flags:

  generate        run the full pipeline on a manuscript
  regenerate      re-run a previous output directory with a fresh seed
  evaluate        score a directory of settings files
  validate-rules  check a rule file
  serve           start the HTTP server

Errors exit nonzero with a one-line diagnostic on stderr: 3 for
manuscript parse problems, 4 for constraint or rule violations, 5 when
no design fits the rules, 6 for file system trouble, 7 when pagination
fails its own checks. The FOLIO_RULES environment variable points at a
replacement rule file; an explicit --rules flag wins over it.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys

from . import __version__
from .evaluate import attribute_vector, coherence_report
from .ingest import ContentStats, ManuscriptError, parse_manuscript
from .paginate import PaginationError
from .pipeline import generate
from .planner import (Constraints, FitError, PlanError, export_settings,
                      import_settings, plan)
from .render import write_outputs
from .rules import FEATURE_NAMES, RuleError, load_rules
from .seeds import SeededStream

EXIT_PARSE = 3
EXIT_CONSTRAINT = 4
EXIT_FIT = 5
EXIT_IO = 6
EXIT_LAYOUT = 7


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="folio",
                                description="generative book typesetting")
    p.add_argument("--version", action="version",
                   version=f"folio {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="typeset a manuscript")
    g.add_argument("--input", required=True, help="manuscript text file")
    g.add_argument("--images", default="", help="directory with image files")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--settings", help="settings file with pinned attributes")
    g.add_argument("--rules", help="rule file (default: bundled)")
    g.add_argument("--toc", action="store_true",
                   help="include a table of contents")
    g.add_argument("--colophon", action="store_true",
                   help="include a colophon page")
    g.add_argument("--language", default=None, choices=("en", "pt"))
    g.add_argument("--surprise", action="store_true",
                   help="enable features at random")
    g.add_argument("--feature", action="append", default=None,
                   choices=list(FEATURE_NAMES), help="enable one feature")
    g.add_argument("--page", default=None, metavar="WxH",
                   help="page size in mm, e.g. 130x200")
    g.add_argument("--margins", default=None, metavar="T,I,B,O",
                   help="margins in mm: top,inside,bottom,outside")
    g.add_argument("--columns", type=int, default=None)
    g.add_argument("--out", required=True, help="output directory")

    r = sub.add_parser("regenerate",
                       help="new book from a previous output directory")
    r.add_argument("--out", required=True, help="existing output directory")
    r.add_argument("--seed", type=int, default=None,
                   help="seed override (default: fresh)")

    e = sub.add_parser("evaluate", help="score settings files")
    e.add_argument("--dir", required=True,
                   help="directory of settings files or run directories")
    e.add_argument("--rules", help="rule file (default: bundled)")

    v = sub.add_parser("validate-rules", help="check a rule file")
    v.add_argument("--rules", required=True)

    s = sub.add_parser("serve", help="start the HTTP API")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--rules", help="rule file (default: bundled)")
    s.add_argument("--spill-dir", default=None,
                   help="directory for on-disk book state")
    return p


def _parse_page(text: str) -> tuple:
    try:
        w, h = text.lower().split("x")
        return float(w), float(h)
    except ValueError:
        raise PlanError(f"--page wants WxH in mm, got {text!r}")


def _parse_margins(text: str) -> dict:
    parts = text.split(",")
    if len(parts) != 4:
        raise PlanError("--margins wants top,inside,bottom,outside in mm")
    try:
        t, i, b, o = (float(x) for x in parts)
    except ValueError:
        raise PlanError(f"--margins values must be numbers, got {text!r}")
    return {"top": t, "inside": i, "bottom": b, "outside": o}


def _constraints_from_args(args, rules) -> Constraints:
    if args.settings:
        with open(args.settings, encoding="utf-8") as f:
            c = import_settings(f.read(), rules)
    else:
        c = Constraints()
    if args.page:
        c.page_w, c.page_h = _parse_page(args.page)
    if args.margins:
        c.margins = _parse_margins(args.margins)
    if args.columns is not None:
        c.columns = args.columns
    if args.toc:
        c.toc = True
    if args.colophon:
        c.colophon = True
    if args.feature:
        c.features = tuple(args.feature)
    if args.surprise:
        c.surprise = True
    if args.language:
        c.language = args.language
    return c


def _fresh_seed() -> int:
    return secrets.randbelow(2 ** 32)


def _run_and_write(ms, rules, seed, constraints, language, out_dir,
                   inputs: dict) -> int:
    result = generate(ms, rules, seed=seed, constraints=constraints,
                      language=language)
    os.makedirs(out_dir, exist_ok=True)
    write_outputs(result.document, out_dir,
                  export_settings(result.settings))
    with open(os.path.join(out_dir, "inputs.json"), "w",
              encoding="utf-8") as f:
        json.dump(inputs, f, indent=2)
        f.write("\n")
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {result.page_count} pages to {out_dir} (seed {seed})")
    return 0


def _cmd_generate(args) -> int:
    rules = load_rules(args.rules)
    with open(args.input, encoding="utf-8") as f:
        source = f.read()
    ms = parse_manuscript(source, args.images)
    c = _constraints_from_args(args, rules)
    seed = args.seed if args.seed is not None else _fresh_seed()
    inputs = {
        "input": os.path.abspath(args.input),
        "images": os.path.abspath(args.images) if args.images else "",
        "language": args.language,
        "rules": os.path.abspath(args.rules) if args.rules else "",
    }
    return _run_and_write(ms, rules, seed, c, args.language, args.out,
                          inputs)


def _cmd_regenerate(args) -> int:
    inputs_path = os.path.join(args.out, "inputs.json")
    settings_path = os.path.join(args.out, "settings.json")
    with open(inputs_path, encoding="utf-8") as f:
        inputs = json.load(f)
    rules = load_rules(inputs.get("rules") or None)
    with open(settings_path, encoding="utf-8") as f:
        c = import_settings(f.read(), rules)
    c.seed = None                      # the stored seed is the old book's
    with open(inputs["input"], encoding="utf-8") as f:
        ms = parse_manuscript(f.read(), inputs.get("images", ""))
    seed = args.seed if args.seed is not None else _fresh_seed()
    return _run_and_write(ms, rules, seed, c, inputs.get("language"),
                          args.out, inputs)


def _settings_files(root: str) -> list:
    """Settings files directly in the directory, or one settings.json
    per run subdirectory."""
    out = []
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if os.path.isfile(path) and name.endswith(".json") \
                and name != "layout.json" and name != "inputs.json" \
                and name != "fontmap.json":
            out.append(path)
        elif os.path.isdir(path):
            nested = os.path.join(path, "settings.json")
            if os.path.isfile(nested):
                out.append(nested)
    return out


def _settings_from_file(path: str, rules):
    """Rebuild the resolved design a settings file describes. Every
    stylistic field is pinned, so planning with a stub classification
    reproduces the design deterministically."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    data = json.loads(text)
    c = import_settings(text, rules)
    stats = ContentStats(word_count=0, image_count=0,
                         words_per_image=float("inf"),
                         book_type=data.get("bookType", "long_reading"))
    return plan(stats, rules, constraints=c, stream=SeededStream(0))


def _cmd_evaluate(args) -> int:
    rules = load_rules(args.rules)
    files = _settings_files(args.dir)
    if len(files) < 2:
        print("folio: evaluate needs at least 2 settings files",
              file=sys.stderr)
        return EXIT_IO
    vectors = []
    for path in files:
        vectors.append(attribute_vector(_settings_from_file(path, rules),
                                        rules))
    rep = coherence_report(vectors)
    print(f"{len(files)} designs from {args.dir}")
    print(f"diversity  {rep.diversity:.4f}")
    print(f"coherence  {rep.coherence:.4f}")
    print()
    print(f"{'slot':<18} status")
    for slot, status in rep.slots.items():
        print(f"{slot:<18} {status}")
    return 0


def _cmd_validate_rules(args) -> int:
    rules = load_rules(args.rules)
    print(f"rules OK: {len(rules.sizes)} sizes, {len(rules.pairings)} "
          f"pairings, {len(rules.header_layouts)} header layouts, "
          f"{len(rules.cover_colors)} cover colors")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn
    from .server import create_app
    app = create_app(rules_path=args.rules, spill_dir=args.spill_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "regenerate": _cmd_regenerate,
    "evaluate": _cmd_evaluate,
    "validate-rules": _cmd_validate_rules,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ManuscriptError as exc:
        print(f"folio: manuscript: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FitError as exc:
        print(f"folio: no fit: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (PlanError, RuleError) as exc:
        print(f"folio: invalid: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except PaginationError as exc:
        print(f"folio: layout: {exc}", file=sys.stderr)
        return EXIT_LAYOUT
    except OSError as exc:
        print(f"folio: io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
