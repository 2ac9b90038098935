"""Desk-scale lab for unsupervised code translation via summarize-and-generate
back-translation: two executable mini-languages with a natural-language-style
pivot, a copy-biased edit model, the back-translation training loop, and an
execution-based evaluation stack."""

__version__ = "0.1.0"
