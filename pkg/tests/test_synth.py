from datetime import date, datetime, timezone

import pytest

from sessionseq import GenConfig, build_dictionary, generate_corpus, sessionize
from sessionseq import event_to_record, zipf_weights

DAY = date(2024, 5, 1)


def config(**overrides) -> GenConfig:
    base = dict(day=DAY, event_types=40, zipf_exponent=1.2,
                sessions=120, mean_session_length=8, seed=7)
    base.update(overrides)
    return GenConfig(**base)


def test_zipf_weights_normalized_and_decreasing():
    weights = zipf_weights(100, 1.2)
    assert sum(weights) == pytest.approx(1.0)
    assert all(a > b for a, b in zip(weights, weights[1:]))
    assert weights[0] / weights[9] == pytest.approx(10 ** 1.2)


def test_same_seed_means_identical_corpus():
    first = [event_to_record(e) for e in generate_corpus(config())]
    second = [event_to_record(e) for e in generate_corpus(config())]
    assert first == second


def test_different_seed_changes_corpus():
    first = [event_to_record(e) for e in generate_corpus(config())]
    second = [event_to_record(e) for e in generate_corpus(config(seed=8))]
    assert first != second


def test_timestamps_stay_inside_the_day():
    start = int(datetime(2024, 5, 1, tzinfo=timezone.utc).timestamp()) * 1000
    end = start + 24 * 3600 * 1000
    for event in generate_corpus(config()):
        assert start <= event.timestamp < end


def test_sessions_survive_sessionization_intact():
    # intra-session gaps are generated below the inactivity threshold,
    # so the pipeline must reconstruct exactly the generated sessions
    events = list(generate_corpus(config()))
    dictionary = build_dictionary(events, built_for=DAY)
    stream, stats = sessionize(events, dictionary)
    records = list(stream)
    assert stats.sessions_out == 120
    assert len({r.session_id for r in records}) == 120
    assert stats.events_encoded == len(events)
    assert sum(len(r.session_sequence) for r in records) == len(events)


def test_event_type_population_is_bounded_and_zipf_like():
    events = list(generate_corpus(config(sessions=400)))
    counts = {}
    for event in events:
        counts[event.event_name.text] = counts.get(event.event_name.text, 0) + 1
    assert len(counts) <= 40
    ranked = sorted(counts.values(), reverse=True)
    # a heavy head: the top type clearly outweighs the median one
    assert ranked[0] > 5 * ranked[len(ranked) // 2]


def test_logged_out_fraction_roughly_respected():
    events = list(generate_corpus(config(sessions=500)))
    sessions = {}
    for event in events:
        sessions[event.session_id] = event.user_id
    fraction = sum(1 for uid in sessions.values() if uid is None) / len(sessions)
    assert 0.10 < fraction < 0.20


def test_mean_session_length_close_to_configured():
    events = list(generate_corpus(config(sessions=500, mean_session_length=20)))
    assert len(events) / 500 == pytest.approx(20, rel=0.1)


def test_large_mean_session_length_works():
    # exercises the chunked length sampling (lambda above 30)
    events = list(generate_corpus(config(sessions=40, mean_session_length=80)))
    assert len(events) / 40 == pytest.approx(80, rel=0.2)


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        config(event_types=0)
    with pytest.raises(ValueError):
        config(mean_session_length=0)
    with pytest.raises(ValueError):
        list(generate_corpus(GenConfig(day=DAY, event_types=10 ** 9)))
