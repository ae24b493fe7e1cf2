"""Toolkit for token-level Chinese metaphor identification experiments.

Covers the non-neural substrate of a MIPVU-style experiment: building a
basic-meaning lexicon from a decoded dictionary dump, serving basic-meaning
embedding vectors, managing the annotated corpus and its document-level
split, decoding raw model outputs into per-token labels, and computing and
aggregating the evaluation metrics.
"""

__version__ = "0.1.0"

# Version of the on-disk formats (dump/corpus/manifest/predictions/store).
# Bumped only when a byte-level contract changes.
FORMAT_VERSION = 1
