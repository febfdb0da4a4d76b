"""Label algebra: orderings, bijections, and the delta/label correspondence."""

import pytest

from tvcp.errors import SchemaError
from tvcp.schema import (
    DURATION_TOKENS,
    DurationClass,
    StatementStamp,
    TnliLabel,
    TvcpLabel,
    change_delta,
    class_index,
    class_of,
    derive_tvcp_label,
    normalized_value,
    parse_label,
)

EXPECTED_TOKENS = (
    "lt_1m", "1m_5m", "5m_15m", "15m_45m", "45m_2h", "2h_6h",
    "gt_6h", "1d_3d", "3d_7d", "1w_4w", "gt_1mo",
)


def test_exactly_eleven_classes_in_scale_order():
    assert len(DurationClass) == 11
    assert DURATION_TOKENS == EXPECTED_TOKENS
    assert [int(c) for c in DurationClass] == list(range(11))


def test_class_index_examples():
    assert class_index("lt_1m") == 0
    assert class_index("1m_5m") == 1
    assert class_index("gt_1mo") == 10


def test_class_index_unknown_token_names_offender():
    with pytest.raises(SchemaError, match="bogus"):
        class_index("bogus")
    with pytest.raises(SchemaError):
        class_of(11)
    with pytest.raises(SchemaError):
        class_of(-1)


def test_token_index_display_bijections():
    tokens = {c.token for c in DurationClass}
    displays = {c.display for c in DurationClass}
    assert len(tokens) == 11 and len(displays) == 11
    for c in DurationClass:
        assert class_of(class_index(c.token)) is c


def test_normalized_value_examples_and_monotonicity():
    assert normalized_value(DurationClass.LT_1M) == 0.0
    assert normalized_value(DurationClass.GT_1MO) == 1.0
    assert normalized_value(DurationClass.M45_2H) == pytest.approx(0.4)
    values = [normalized_value(c) for c in DurationClass]
    assert values == sorted(values)
    assert len(set(values)) == 11  # injective


def test_change_delta_examples():
    assert change_delta(DurationClass.H2_6H, DurationClass.H2_6H) == 0
    assert change_delta(DurationClass.H2_6H, DurationClass.D1_3D) == 2
    assert change_delta(DurationClass.W1_4W, DurationClass.M5_15M) == -7


def test_derive_label_examples():
    assert derive_tvcp_label(DurationClass.H2_6H, DurationClass.H2_6H) is TvcpLabel.UNC
    assert derive_tvcp_label(DurationClass.H2_6H, DurationClass.D1_3D) is TvcpLabel.INC
    assert derive_tvcp_label(DurationClass.W1_4W, DurationClass.M5_15M) is TvcpLabel.DEC


def test_label_agrees_with_delta_sign_on_all_121_pairs():
    for original in DurationClass:
        for updated in DurationClass:
            delta = change_delta(original, updated)
            label = derive_tvcp_label(original, updated)
            if delta < 0:
                assert label is TvcpLabel.DEC
            elif delta == 0:
                assert label is TvcpLabel.UNC
            else:
                assert label is TvcpLabel.INC


def test_label_vocabularies():
    assert [l.value for l in TvcpLabel] == ["DEC", "UNC", "INC"]
    assert [l.value for l in TnliLabel] == ["SUO", "INV", "UNK"]
    assert parse_label("INC") is TvcpLabel.INC
    with pytest.raises(SchemaError):
        parse_label("MAYBE")


def test_statement_stamp_rejects_blank_text():
    StatementStamp(text="driving home", created_at=1_700_000_000)
    with pytest.raises(SchemaError):
        StatementStamp(text="   ")
