"""Phonon-mode engineering of trapped-ion chains with optical tweezers."""

__version__ = "0.1.0"
