"""livingdoc: build living scholarly manuscripts from markdown, identifiers and versioned data."""

__version__ = "0.1.0"
