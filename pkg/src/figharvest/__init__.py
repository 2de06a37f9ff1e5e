"""Tools for harvesting, grading, curating, and browsing figure regions
extracted from paginated documents."""

__version__ = "0.1.0"
