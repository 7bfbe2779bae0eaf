"""Dialect labels shared across corpus handling, classification, and reports."""

from enum import Enum


class DialectLabel(str, Enum):
    """The two Tamil dialect classes: literary (LT) and colloquial (CT).

    LT is the positive class wherever precision/recall style metrics appear.
    """

    LT = "LT"
    CT = "CT"
