"""Argument annotation toolkit: corpora, tag schemes, a recurrent encoder and evaluation."""

__version__ = "0.1.0"
