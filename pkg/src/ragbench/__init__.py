"""Corpus-evaluation harness: chunk-size sweeps over a retrieval-augmented
generation pipeline, scored by answer correctness against a QA ground-truth
set."""

__version__ = "0.1.0"
