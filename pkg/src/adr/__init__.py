"""Automatic diacritic restoration for Yoruba text.

The package treats restoration as sequence-to-sequence translation from
undiacritized to fully diacritized text. It ships the whole pipeline:
corpus preparation and ambiguity metrics, interpolated n-gram baselines,
a soft-attention recurrent model and a self-attention model built on an
in-package reverse-mode autodiff engine, plus training, evaluation,
checkpointing and a command-line interface.
"""

__version__ = "0.1.0"
