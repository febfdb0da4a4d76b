"""Label algebra: duration classes, change labels, and their derivations.

Everything here is immutable and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from tvcp.errors import SchemaError


class DurationClass(enum.IntEnum):
    """Validity-duration class on an 11-step logarithmic scale.

    The integer value is the ordinal index; ordering follows the scale from
    shortest to longest span.
    """

    LT_1M = 0
    M1_5M = 1
    M5_15M = 2
    M15_45M = 3
    M45_2H = 4
    H2_6H = 5
    GT_6H = 6
    D1_3D = 7
    D3_7D = 8
    W1_4W = 9
    GT_1MO = 10

    @property
    def token(self) -> str:
        """Stable machine-readable identifier used in all file formats."""
        return _TOKENS[self]

    @property
    def display(self) -> str:
        """Human-readable wording of the class."""
        return _DISPLAY[self]


_TOKENS = {
    DurationClass.LT_1M: "lt_1m",
    DurationClass.M1_5M: "1m_5m",
    DurationClass.M5_15M: "5m_15m",
    DurationClass.M15_45M: "15m_45m",
    DurationClass.M45_2H: "45m_2h",
    DurationClass.H2_6H: "2h_6h",
    DurationClass.GT_6H: "gt_6h",
    DurationClass.D1_3D: "1d_3d",
    DurationClass.D3_7D: "3d_7d",
    DurationClass.W1_4W: "1w_4w",
    DurationClass.GT_1MO: "gt_1mo",
}

_DISPLAY = {
    DurationClass.LT_1M: "less than 1 minute",
    DurationClass.M1_5M: "1-5 minutes",
    DurationClass.M5_15M: "5-15 minutes",
    DurationClass.M15_45M: "15-45 minutes",
    DurationClass.M45_2H: "45 minutes-2 hours",
    DurationClass.H2_6H: "2-6 hours",
    DurationClass.GT_6H: "more than 6 hours",
    DurationClass.D1_3D: "1-3 days",
    DurationClass.D3_7D: "3-7 days",
    DurationClass.W1_4W: "1-4 weeks",
    DurationClass.GT_1MO: "more than 1 month",
}

_BY_TOKEN = {token: cls for cls, token in _TOKENS.items()}

#: All duration tokens in scale order.
DURATION_TOKENS = tuple(_TOKENS[c] for c in DurationClass)


class TvcpLabel(enum.Enum):
    """Ternary change label: did the follow-up shrink, keep, or extend validity."""

    DEC = "DEC"
    UNC = "UNC"
    INC = "INC"

    @property
    def index(self) -> int:
        """Position used for logit ordering: DEC=0, UNC=1, INC=2."""
        return _LABEL_ORDER.index(self)


_LABEL_ORDER = (TvcpLabel.DEC, TvcpLabel.UNC, TvcpLabel.INC)

#: Logit ordering for classifier heads.
LABELS = _LABEL_ORDER


class TnliLabel(enum.Enum):
    """Inference-style label vocabulary (supported / invalidated / unknown).

    Documentation-grade: no operation in this package consumes it.
    """

    SUO = "SUO"
    INV = "INV"
    UNK = "UNK"


@dataclass(frozen=True)
class StatementStamp:
    """A statement text with its optional creation time (epoch seconds)."""

    text: str
    created_at: int | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise SchemaError("statement text is empty after whitespace trim")


def class_index(token: str) -> int:
    """Return the 0-based scale position of a canonical duration token."""
    try:
        return int(_BY_TOKEN[token])
    except KeyError:
        raise SchemaError(f"unknown duration token: {token!r}") from None


def class_of(index: int) -> DurationClass:
    """Inverse of :func:`class_index`."""
    try:
        return DurationClass(index)
    except ValueError:
        raise SchemaError(f"duration index out of range: {index!r}") from None


def class_of_token(token: str) -> DurationClass:
    """Resolve a canonical token to its :class:`DurationClass`."""
    return class_of(class_index(token))


def normalized_value(c: DurationClass) -> float:
    """Map a duration class to [0, 1] linearly by scale index.

    The divisor is the full scale span (10) regardless of any dataset-level
    restriction on which classes may appear.
    """
    return int(c) / 10.0


def change_delta(original: DurationClass, updated: DurationClass) -> int:
    """Signed class distance from the original to the updated duration."""
    return int(updated) - int(original)


def derive_tvcp_label(original: DurationClass, updated: DurationClass) -> TvcpLabel:
    """Change label implied by a pair of duration estimates."""
    if updated < original:
        return TvcpLabel.DEC
    if updated > original:
        return TvcpLabel.INC
    return TvcpLabel.UNC


def parse_label(value: str) -> TvcpLabel:
    """Resolve a label string (DEC/UNC/INC) to its enum member."""
    try:
        return TvcpLabel(value)
    except ValueError:
        raise SchemaError(f"unknown change label: {value!r}") from None
