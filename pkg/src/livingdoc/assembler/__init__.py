from .core import (
    DocumentModel,
    ManuscriptSource,
    Section,
    build_document,
    compute_manuscript_stats,
    count_words,
    load_manuscript,
    restrict_to_section,
)
from .metadata import Author, ManuscriptMetadata, load_metadata, valid_orcid
from .variables import (
    TemplateVariableSet,
    canonical_value,
    load_variable_file,
    merge_variable_files,
    substitute_variables,
)

__all__ = [
    "Author",
    "DocumentModel",
    "ManuscriptMetadata",
    "ManuscriptSource",
    "Section",
    "TemplateVariableSet",
    "build_document",
    "canonical_value",
    "compute_manuscript_stats",
    "count_words",
    "load_manuscript",
    "load_metadata",
    "load_variable_file",
    "merge_variable_files",
    "restrict_to_section",
    "substitute_variables",
    "valid_orcid",
]
