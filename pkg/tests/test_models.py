"""Encoder contracts, siamese construction, span attention, head wiring."""

import pytest
import torch

from tvcp.errors import ContractError, EncoderError
from tvcp.models import (
    ChangeClassifier,
    EncoderConfig,
    SpanPool,
    build_classifier,
    build_encoder,
    encode,
    reset_parameters,
    selfexplain_spans,
    siamese_features,
)

TINY = EncoderConfig(hidden_size=16, max_length=32, backend="tiny:vocab=128,layers=1,heads=2")


def tiny_encoder(seed=0):
    enc = build_encoder(TINY)
    reset_parameters(enc, seed)
    return enc


def span_count_oracle(n, max_len):
    return sum(min(max_len, n - i + 1) for i in range(1, n + 1))


# -- encoding ------------------------------------------------------------------


def test_separate_mode_identical_texts_identical_pooled():
    enc = tiny_encoder()
    pair = enc.encode("the same words here", "the same words here", mode="separate")
    assert torch.equal(pair.h_st, pair.h_sf)
    assert pair.h_st.shape == (16,)


def test_separate_mode_distinct_texts_distinct_pooled():
    enc = tiny_encoder()
    pair = enc.encode("painting the fence", "the paint ran out", mode="separate")
    assert not torch.equal(pair.h_st, pair.h_sf)


def test_concatenated_mode_single_joint_vector():
    enc = tiny_encoder()
    pair = enc.encode("painting the fence", "the paint ran out", mode="concatenated")
    assert torch.equal(pair.h_st, pair.h_sf)
    assert pair.target_states.shape == (3, 16)
    assert pair.followup_states.shape == (4, 16)
    assert not pair.truncated


def test_truncation_recorded_and_bounded():
    enc = tiny_encoder()
    long_text = " ".join(f"w{i}" for i in range(60))
    pair = enc.encode(long_text, long_text, mode="concatenated")
    assert pair.truncated
    total = pair.target_states.shape[0] + pair.followup_states.shape[0]
    assert total <= TINY.max_length - 3


def test_encoder_vector_length_matches_config():
    for hidden in (8, 24):
        config = EncoderConfig(hidden_size=hidden, max_length=16,
                               backend="tiny:vocab=64,layers=1,heads=2")
        enc = build_encoder(config)
        reset_parameters(enc, 0)
        pair = enc.encode("a b c", "d e", mode="separate")
        assert pair.h_st.shape == (hidden,)


def test_encode_convenience_function_deterministic():
    p1 = encode("a b c", "d e", TINY, mode="concatenated")
    p2 = encode("a b c", "d e", TINY, mode="concatenated")
    assert torch.equal(p1.h_st, p2.h_st)


def test_encode_rejects_empty_text_and_bad_mode():
    enc = tiny_encoder()
    with pytest.raises(ContractError):
        enc.encode("", "something", mode="separate")
    with pytest.raises(ContractError):
        enc.encode_batch([("a", "b")], mode="diagonal")


def test_unknown_backend_raises_encoder_error():
    with pytest.raises(EncoderError, match="unavailable"):
        build_encoder(EncoderConfig(backend="quantum"))
    with pytest.raises(EncoderError):
        build_encoder(EncoderConfig(backend="tiny:vocab=abc"))


def test_encoder_config_invariants():
    with pytest.raises(ContractError):
        EncoderConfig(hidden_size=0)
    with pytest.raises(ContractError):
        EncoderConfig(max_length=4)


# -- siamese features --------------------------------------------------------


def test_siamese_worked_example():
    h_st = torch.tensor([1.0, 2.0])
    h_sf = torch.tensor([3.0, 5.0])
    out = siamese_features(h_st, h_sf)
    assert out.tolist() == [1.0, 2.0, 3.0, 5.0, -2.0, -3.0, 3.0, 10.0]


def test_siamese_zero_followup():
    h_st = torch.tensor([2.0, -1.0, 4.0])
    out = siamese_features(h_st, torch.zeros(3))
    assert out.tolist() == [2.0, -1.0, 4.0, 0.0, 0.0, 0.0, 2.0, -1.0, 4.0, 0.0, 0.0, 0.0]


def test_siamese_matches_elementwise_oracle():
    gen = torch.Generator().manual_seed(17)
    for hidden in range(1, 17):
        for _ in range(10):
            a = torch.randn(hidden, generator=gen, dtype=torch.float64)
            b = torch.randn(hidden, generator=gen, dtype=torch.float64)
            out = siamese_features(a, b)
            assert out.shape == (4 * hidden,)
            for i in range(hidden):
                assert out[i] == a[i]
                assert out[hidden + i] == b[i]
                assert out[2 * hidden + i] == a[i] - b[i]
                assert out[3 * hidden + i] == a[i] * b[i]


def test_siamese_length_mismatch():
    with pytest.raises(ContractError):
        siamese_features(torch.zeros(3), torch.zeros(4))


# -- span attention ------------------------------------------------------------


def test_span_count_four_tokens():
    enc = tiny_encoder()
    pool = SpanPool(hidden_size=16, max_span_length=5)
    pair = enc.encode("one two three four", "five six", mode="concatenated")
    analysis = selfexplain_spans(pool, pair)
    target_spans = [s for s in analysis.spans if s[0] == 0]
    assert len(target_spans) == 10  # 4+3+2+1
    assert len(analysis.spans) == 10 + span_count_oracle(2, 5)


@pytest.mark.parametrize("n,max_len", [(1, 5), (3, 2), (6, 3), (8, 5), (5, 1), (7, 6)])
def test_span_count_matches_closed_form(n, max_len):
    enc = tiny_encoder()
    pool = SpanPool(hidden_size=16, max_span_length=max_len)
    text = " ".join(f"tok{i}" for i in range(n))
    pair = enc.encode(text, "other words", mode="concatenated")
    analysis = selfexplain_spans(pool, pair)
    target_spans = [s for s in analysis.spans if s[0] == 0]
    assert len(target_spans) == span_count_oracle(n, max_len)


def test_span_attention_normalized_and_means_correct():
    enc = tiny_encoder()
    pool = SpanPool(hidden_size=16, max_span_length=4)
    reset_parameters(pool, 3)
    pair = enc.encode("alpha beta gamma", "delta epsilon", mode="concatenated")
    analysis = selfexplain_spans(pool, pair)
    assert float(analysis.attention.detach().sum()) == pytest.approx(1.0, abs=1e-6)
    assert (analysis.attention.detach() >= 0).all()
    # span representation equals the mean of its token states
    for (stmt, start, length), rep in zip(analysis.spans, analysis.representations):
        states = pair.target_states if stmt == 0 else pair.followup_states
        want = states[start : start + length].mean(dim=0)
        assert torch.allclose(rep.detach(), want.detach(), atol=1e-6)


def test_uniform_attention_gives_one_over_k():
    enc = tiny_encoder().double()
    pool = SpanPool(hidden_size=16, max_span_length=3).double()
    with torch.no_grad():
        pool.scorer.weight.zero_()
        pool.scorer.bias.zero_()
    pair = enc.encode("a b c d", "e f g", mode="concatenated")
    analysis = selfexplain_spans(pool, pair)
    k = len(analysis.spans)
    assert float(analysis.sparsity.detach()) == pytest.approx(1.0 / k, abs=1e-12)
    assert torch.allclose(
        analysis.attention.detach(), torch.full((k,), 1.0 / k, dtype=torch.float64), atol=1e-12
    )


def test_one_hot_attention_gives_sparsity_one():
    pool = SpanPool(hidden_size=4, max_span_length=1)
    with torch.no_grad():
        pool.scorer.weight.zero_()
        pool.scorer.weight[0, 0] = 1.0
        pool.scorer.bias.zero_()
    from tvcp.models.encoder import EncodedPair

    target = torch.tensor([[4000.0, 0, 0, 0], [-4000.0, 0, 0, 0]])
    followup = torch.tensor([[-4000.0, 0, 0, 0]])
    pair = EncodedPair(
        mode="concatenated", h_st=torch.zeros(4), h_sf=torch.zeros(4),
        target_states=target, followup_states=followup,
    )
    analysis = pool.analyze_pair(pair)
    assert float(analysis.sparsity.detach()) == pytest.approx(1.0)
    assert float(analysis.attention.detach().max()) == pytest.approx(1.0)


# -- heads ----------------------------------------------------------------------


def classifier(archetype, multitask=False, seed=0, dropout=0.0):
    return build_classifier(
        TINY, archetype=archetype, dropout=dropout, multitask=multitask, seed=seed
    )


PAIRS = [
    ("I am painting the fence", "the paint ran out again"),
    ("driving home from work", "massive traffic jam on the highway"),
    ("baking sourdough bread", "the oven broke down"),
]


@pytest.mark.parametrize("archetype", ["transformer", "siamese", "selfexplain"])
def test_logits_shape_and_multitask_flag(archetype):
    model = classifier(archetype, multitask=False)
    model.eval()
    out = model(model.encode_pairs(PAIRS))
    assert out.logits.shape == (3, 3)
    assert out.pred_original is None and out.pred_updated is None

    multi = classifier(archetype, multitask=True)
    multi.eval()
    out = multi(multi.encode_pairs(PAIRS))
    assert out.pred_original.shape == (3,)
    assert out.pred_updated.shape == (3,)


def test_selfexplain_output_attention_sums_to_one():
    model = classifier("selfexplain")
    model.eval()
    out = model(model.encode_pairs(PAIRS))
    sums = (out.span_attention * out.span_mask).sum(dim=-1)
    assert torch.allclose(sums, torch.ones(3), atol=1e-6)
    pair = model.encoder.encode(*PAIRS[0], mode="concatenated")
    single = model.classify_pair(pair)
    assert len(single.change_logits) == 3
    assert sum(single.span_attention) == pytest.approx(1.0, abs=1e-6)


def test_mode_archetype_mismatch_rejected():
    model = classifier("siamese")
    batch = model.encoder.encode_batch(PAIRS, mode="concatenated")
    with pytest.raises(ContractError):
        model(batch)
    model2 = classifier("transformer")
    batch2 = model2.encoder.encode_batch(PAIRS, mode="separate")
    with pytest.raises(ContractError):
        model2(batch2)
    with pytest.raises(ContractError):
        ChangeClassifier(tiny_encoder(), archetype="recurrent")


@pytest.mark.parametrize("archetype", ["transformer", "siamese", "selfexplain"])
def test_multitask_reduction_identical_logits(archetype):
    single = classifier(archetype, multitask=False, seed=11)
    multi = classifier(archetype, multitask=True, seed=11)
    single.eval()
    multi.eval()
    batch_s = single.encode_pairs(PAIRS)
    batch_m = multi.encode_pairs(PAIRS)
    out_s = single(batch_s)
    out_m = multi(batch_m)
    assert torch.equal(out_s.logits, out_m.logits)


def test_softmax_shift_invariance():
    gen = torch.Generator().manual_seed(5)
    logits = torch.randn(8, 3, generator=gen)
    gold = torch.randint(0, 3, (8,), generator=gen)
    shifted = logits + 3.7
    ce = torch.nn.functional.cross_entropy(logits, gold)
    ce_shifted = torch.nn.functional.cross_entropy(shifted, gold)
    assert float(ce) == pytest.approx(float(ce_shifted), rel=1e-6)
    assert torch.equal(logits.argmax(dim=1), shifted.argmax(dim=1))


def test_reset_parameters_deterministic_and_seed_sensitive():
    m1 = classifier("transformer", seed=3)
    m2 = classifier("transformer", seed=3)
    m3 = classifier("transformer", seed=4)
    for (n1, p1), (_, p2), (_, p3) in zip(
        m1.named_parameters(), m2.named_parameters(), m3.named_parameters()
    ):
        assert torch.equal(p1, p2), n1
    assert any(
        not torch.equal(p1, p3)
        for (_, p1), (_, p3) in zip(m1.named_parameters(), m3.named_parameters())
    )
