"""HTTP facade over the engine for the web studio.

The API is a thin wrapper over the pipeline: a book is generated once
per POST, stored under an opaque id, and served back as settings,
layout and SVG pages. Regenerating keeps the manuscript; with
keepSettings it also pins the whole previous design, otherwise it
replans under the book's original constraints with a fresh seed.

State is an in-memory store guarded by a lock, one entry per book id;
when a spill directory is configured every revision is also written to
disk as a normal output tree. Validation failures answer 400 with
field paths, unknown ids and pages 404, infeasible fits 422 with the
planner's diagnostic.
"""

from __future__ import annotations

import json
import os
import secrets
import shutil
import tempfile
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import JSONResponse, Response

from . import __version__
from .ingest import ManuscriptError, parse_manuscript
from .paginate import PaginationError
from .pipeline import generate
from .planner import (Constraints, FitError, PlanError, export_settings,
                      import_settings, settings_to_dict, validate_constraints)
from .render import render_page_svg, write_layout_json, write_outputs
from .rules import load_rules


@dataclass
class BookState:
    manuscript_text: str
    image_dir: str
    constraints_text: str        # the user's original pins, may be "{}"
    language: str
    settings: object
    document: object
    warnings: list
    revision: int = 1
    svg_cache: dict = field(default_factory=dict)


@dataclass
class BookStore:
    books: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def get(self, book_id: str):
        with self.lock:
            return self.books.get(book_id)

    def put(self, book_id: str, state: BookState):
        with self.lock:
            self.books[book_id] = state


def _error(status: int, message: str, errors=None) -> JSONResponse:
    body = {"error": message}
    if errors:
        body["errors"] = errors
    return JSONResponse(status_code=status, content=body)


def _constraints_from_text(text: str, rules) -> Constraints:
    """Constraints from a client JSON body: either a full settings file
    or a sparse {field: value} object with the same key names."""
    if not text or not text.strip() or text.strip() == "{}":
        return Constraints()
    return import_settings(text, rules)


def create_app(rules_path: str = None, spill_dir: str = None) -> FastAPI:
    rules = load_rules(rules_path)
    store = BookStore()
    app = FastAPI(title="folio", version=__version__)

    def _spill(book_id: str, state: BookState):
        if not spill_dir:
            return
        out = os.path.join(spill_dir, book_id)
        os.makedirs(out, exist_ok=True)
        write_outputs(state.document, out, export_settings(state.settings))

    def _generate_state(ms_text: str, image_dir: str, constraints_text: str,
                        language: str, seed: int) -> BookState:
        ms = parse_manuscript(ms_text, image_dir)
        c = _constraints_from_text(constraints_text, rules)
        result = generate(ms, rules, seed=seed, constraints=c,
                          language=language or None)
        return BookState(
            manuscript_text=ms_text, image_dir=image_dir,
            constraints_text=constraints_text or "{}",
            language=language or "",
            settings=result.settings, document=result.document,
            warnings=result.warnings)

    def _book_json(book_id: str, state: BookState) -> dict:
        return {
            "bookId": book_id,
            "revision": state.revision,
            "settings": settings_to_dict(state.settings),
            "pageCount": len(state.document.pages),
            "warnings": state.warnings,
        }

    @app.post("/api/books")
    async def create_book(manuscript: UploadFile = File(...),
                          images: list[UploadFile] = File(None),
                          constraints: str = Form(None),
                          language: str = Form(None),
                          seed: int = Form(None)):
        ms_text = (await manuscript.read()).decode("utf-8", "replace")
        image_dir = ""
        if images:
            image_dir = tempfile.mkdtemp(prefix="folio-img-")
            for up in images:
                name = os.path.basename(up.filename or "image")
                with open(os.path.join(image_dir, name), "wb") as f:
                    shutil.copyfileobj(up.file, f)
        try:
            state = _generate_state(
                ms_text, image_dir, constraints, language,
                seed if seed is not None else secrets.randbelow(2 ** 32))
        except ManuscriptError as exc:
            return _error(400, f"manuscript: {exc}")
        except FitError as exc:
            return _error(422, str(exc))
        except (PlanError, PaginationError) as exc:
            return _error(400, str(exc))
        book_id = secrets.token_hex(8)
        store.put(book_id, state)
        _spill(book_id, state)
        return _book_json(book_id, state)

    @app.post("/api/books/{book_id}/regenerate")
    async def regenerate(book_id: str, body: dict = None):
        state = store.get(book_id)
        if state is None:
            return _error(404, "unknown book")
        body = body or {}
        keep = bool(body.get("keepSettings", True))
        seed = body.get("seed")
        seed = int(seed) if seed is not None else secrets.randbelow(2 ** 32)
        constraints_text = export_settings(state.settings) if keep \
            else state.constraints_text
        try:
            new = _generate_state(state.manuscript_text, state.image_dir,
                                  constraints_text, state.language, seed)
        except FitError as exc:
            return _error(422, str(exc))
        except (PlanError, PaginationError) as exc:
            return _error(400, str(exc))
        new.constraints_text = state.constraints_text
        new.revision = state.revision + 1
        store.put(book_id, new)
        _spill(book_id, new)
        return _book_json(book_id, new)

    @app.get("/api/books/{book_id}/pages/{page}.svg")
    async def page_svg(book_id: str, page: int):
        state = store.get(book_id)
        if state is None:
            return _error(404, "unknown book")
        if page < 1 or page > len(state.document.pages):
            return _error(404, "no such page")
        svg = state.svg_cache.get(page)
        if svg is None:
            svg = render_page_svg(state.document.pages[page - 1],
                                  state.settings, f"p{page - 1}")
            state.svg_cache[page] = svg
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/api/books/{book_id}/cover-{side}.svg")
    async def cover_svg(book_id: str, side: str):
        state = store.get(book_id)
        if state is None:
            return _error(404, "unknown book")
        page = {"front": state.document.cover_front,
                "back": state.document.cover_back}.get(side)
        if page is None:
            return _error(404, "no such cover")
        return Response(
            content=render_page_svg(page, state.settings, f"c{side}"),
            media_type="image/svg+xml")

    @app.get("/api/books/{book_id}/settings")
    async def book_settings(book_id: str):
        state = store.get(book_id)
        if state is None:
            return _error(404, "unknown book")
        return Response(content=export_settings(state.settings),
                        media_type="application/json")

    @app.get("/api/books/{book_id}/layout")
    async def book_layout(book_id: str):
        state = store.get(book_id)
        if state is None:
            return _error(404, "unknown book")
        return Response(content=write_layout_json(state.document),
                        media_type="application/json")

    @app.get("/api/rules")
    async def active_rules():
        return rules.raw

    @app.get("/api/fonts")
    async def fonts():
        return {"pairings": [
            {"id": p.id,
             "title": {"family": p.title.family, "weight": p.title.weight},
             "body": {"family": p.body.family, "weight": p.body.weight},
             "leading": p.leading,
             "bookTypes": list(p.book_types),
             "bodyClass": p.body_class}
            for p in rules.pairings]}

    @app.post("/api/settings/validate")
    async def validate_settings(body: dict):
        try:
            c = import_settings(json.dumps(body), rules)
        except PlanError as exc:
            return _error(400, "invalid settings",
                          errors=[e.strip() for e in str(exc).split(";")])
        errors = validate_constraints(c, rules)
        if errors:
            return _error(400, "invalid settings", errors=errors)
        return {"errors": []}

    return app
