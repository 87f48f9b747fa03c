"""folio: a rule-based generative book design system.

Feed it a manuscript and a seed; it plans a complete typographic design
(page size, margins, grid, font pairing, styles), typesets the text with
justified line breaking and hyphenation, lays out pages with running
headers, images and captions, builds the cover, and renders everything
to SVG plus a machine-readable layout description. The same seed always
yields the same book; an exported settings file re-applies one design to
any other manuscript.
"""

__version__ = "1.0.0"

from .cover import (CoverError, TitleInfo, design_cover, extract_title,
                    maximize_title_size)
from .evaluate import (AttributeVector, attribute_vector, coherence_report,
                       diversity_score)
from .features import (FeatureSet, apply_features, feature_set_from_settings,
                       select_features)
from .ingest import (ContentStats, Heading, ImageRef, Manuscript, Paragraph,
                     Run, assign_heading_levels, classify, parse_manuscript,
                     serialize_manuscript)
from .paginate import (Frame, LayoutDocument, Page, PaginationError,
                       PlacedLine, paginate)
from .pipeline import GenerationResult, generate
from .planner import (Constraints, DesignSettings, FitError, PlanError,
                      compute_grid, export_settings, fit_body_size,
                      import_settings, plan)
from .render import (read_layout_json, render_svg, write_layout_json,
                     write_outputs)
from .rules import RuleSet, RuleError, load_rules, validate_rules
from .seeds import SeededStream

__all__ = [
    "__version__",
    "ContentStats", "Heading", "ImageRef", "Manuscript", "Paragraph", "Run",
    "assign_heading_levels", "classify", "parse_manuscript",
    "serialize_manuscript",
    "Constraints", "DesignSettings", "FitError", "PlanError",
    "compute_grid", "export_settings", "fit_body_size", "import_settings",
    "plan",
    "Frame", "LayoutDocument", "Page", "PaginationError", "PlacedLine",
    "paginate",
    "FeatureSet", "apply_features", "feature_set_from_settings",
    "select_features",
    "CoverError", "TitleInfo", "design_cover", "extract_title",
    "maximize_title_size",
    "read_layout_json", "render_svg", "write_layout_json", "write_outputs",
    "AttributeVector", "attribute_vector", "coherence_report",
    "diversity_score",
    "GenerationResult", "generate",
    "RuleSet", "RuleError", "load_rules", "validate_rules",
    "SeededStream",
]
