"""Toolkit for building, curating, and benchmarking a Chinese
intangible-cultural-heritage text corpus and its instruction datasets."""

__version__ = "0.1.0"
