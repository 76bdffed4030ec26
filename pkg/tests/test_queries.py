from collections import Counter, defaultdict
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sessionseq import (
    DictionaryMismatch,
    EmptyFunnel,
    SessionRecord,
    build_dictionary,
    compile_pattern,
    count_events,
    decode_sequence,
    expand_pattern,
    funnel,
    funnel_unique_users,
    rollup,
    sessionize,
    summary_stats,
)
from sessionseq.queries import (
    DURATION_BUCKETS,
    SymbolClass,
    WILDCARD,
    duration_bucket,
)

from conftest import BASE_TS, make_event, random_corpus

DAY = date(2024, 5, 1)


def record(sequence: str, user_id=1, session_id="ck", duration=0) -> SessionRecord:
    return SessionRecord(user_id=user_id, session_id=session_id, ip="10.0.0.1",
                         session_sequence=sequence, duration=duration,
                         start_ts=BASE_TS)


def symbol_class(*code_points, key="d") -> SymbolClass:
    return SymbolClass(pattern=compile_pattern("*"),
                       symbols=frozenset(code_points), dictionary_key=key)


def prepared_day(rng, n_events=300):
    events = random_corpus(rng, n_events)
    dictionary = build_dictionary(events, built_for=DAY)
    stream, _ = sessionize(events, dictionary)
    return events, dictionary, list(stream)


class TestExpandPattern:
    def test_universal_glob_expands_to_all_symbols(self, rng):
        _, d, _ = prepared_day(rng)
        expanded = expand_pattern(d, compile_pattern("*"))
        assert expanded.symbols == frozenset(d.code_points())
        assert expanded.dictionary_key == d.key

    def test_cross_client_suffix(self):
        events = [
            make_event(name="web:profile:header:photo:avatar:profile_click"),
            make_event(name="iphone:profile:header:photo:avatar:profile_click"),
            make_event(name="web:home::::view"),
        ]
        d = build_dictionary(events, built_for=DAY)
        expanded = expand_pattern(d, compile_pattern("*:profile_click"))
        assert expanded.symbols == {
            d._by_name["web:profile:header:photo:avatar:profile_click"],
            d._by_name["iphone:profile:header:photo:avatar:profile_click"],
        }

    def test_no_match_gives_empty_class(self, rng):
        _, d, _ = prepared_day(rng)
        expanded = expand_pattern(d, compile_pattern("tv:*"))
        assert expanded.symbols == frozenset()


class TestCount:
    def test_total_vs_sessions_modes(self):
        x, y = 0x21, 0x22
        sessions = [record(chr(x) + chr(y) + chr(x))]
        assert count_events(sessions, symbol_class(x), "total") == 2
        assert count_events(sessions, symbol_class(x), "sessions") == 1

    def test_empty_class_counts_zero(self):
        sessions = [record(chr(0x21))]
        assert count_events(sessions, symbol_class(), "total") == 0
        assert count_events(sessions, symbol_class(), "sessions") == 0

    def test_mismatched_dictionary_raises(self):
        with pytest.raises(DictionaryMismatch):
            count_events([record("!")], symbol_class(0x21, key="a"),
                         sessions_key="b")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            count_events([record("!")], symbol_class(0x21), mode="average")

    def test_total_matches_raw_log_oracle(self, rng):
        for trial in range(15):
            events, d, sessions = prepared_day(rng, 250)
            pattern = rng.choice(["*", "web:*", "*:click_*", "iphone:*",
                                  "*:view_*", "*:home:*"])
            compiled = compile_pattern(pattern)
            expanded = expand_pattern(d, compiled)
            total = count_events(sessions, expanded, "total", sessions_key=d.key)
            oracle = sum(1 for e in events if compiled.matches(e.event_name))
            assert total == oracle

    def test_sessions_mode_matches_decoded_oracle(self, rng):
        for trial in range(10):
            _, d, sessions = prepared_day(rng, 200)
            compiled = compile_pattern(rng.choice(["web:*", "*:open_*", "*"]))
            expanded = expand_pattern(d, compiled)
            got = count_events(sessions, expanded, "sessions")
            oracle = sum(
                1 for r in sessions
                if any(compiled.matches(n)
                       for n in decode_sequence(d, r.session_sequence))
            )
            assert got == oracle

    def test_user_allowlist_restricts_counts(self, rng):
        events, d, sessions = prepared_day(rng, 250)
        expanded = expand_pattern(d, compile_pattern("*"))
        allowlist = {1, 3}
        got = count_events(sessions, expanded, "total", user_allowlist=allowlist)
        oracle = sum(len(r.session_sequence) for r in sessions
                     if r.user_id in allowlist)
        assert got == oracle
        # logged-out sessions never pass an allowlist
        assert count_events(sessions, expanded, "sessions",
                            user_allowlist=set()) == 0


def brute_depth(names, stage_sets):
    """Greedy in-order stage matching over a decoded name list."""
    depth, pos = 0, 0
    for stage in stage_sets:
        hit = next((i for i in range(pos, len(names)) if names[i] in stage), None)
        if hit is None:
            break
        pos = hit + 1
        depth += 1
    return depth


class TestFunnel:
    A, B, C = 0x21, 0x22, 0x23

    def test_in_order_match(self):
        sessions = [record(chr(self.A) + chr(self.B) + chr(self.C))]
        result = funnel(sessions, [symbol_class(self.A), symbol_class(self.C)])
        assert result.stage_counts == (1, 1)

    def test_order_violation(self):
        sessions = [record(chr(self.C) + chr(self.A) + chr(self.B))]
        result = funnel(sessions, [symbol_class(self.A), symbol_class(self.C)])
        assert result.stage_counts == (1, 0)

    def test_render_format(self):
        sessions = [record(chr(self.A))]
        result = funnel(sessions, [symbol_class(self.A), symbol_class(self.C)])
        assert result.render() == "(0, 1) (1, 0)"

    def test_same_symbol_not_reused_for_two_stages(self):
        sessions = [record(chr(self.A))]
        result = funnel(sessions, [symbol_class(self.A), symbol_class(self.A)])
        assert result.stage_counts == (1, 0)

    def test_contiguous_mode(self):
        sessions = [record(chr(self.A) + chr(self.B) + chr(self.C))]
        spread = funnel(sessions, [symbol_class(self.A), symbol_class(self.C)],
                        contiguous=True)
        assert spread.stage_counts == (1, 0)
        adjacent = funnel(sessions, [symbol_class(self.A), symbol_class(self.B)],
                          contiguous=True)
        assert adjacent.stage_counts == (1, 1)

    def test_empty_funnel_rejected(self):
        with pytest.raises(EmptyFunnel):
            funnel([record("!")], [])

    def test_empty_stage_class_matches_nothing(self):
        sessions = [record(chr(self.A))]
        result = funnel(sessions, [symbol_class()])
        assert result.stage_counts == (0,)

    def test_mismatched_stage_dictionaries_raise(self):
        with pytest.raises(DictionaryMismatch):
            funnel([record("!")],
                   [symbol_class(self.A, key="x"), symbol_class(self.B, key="y")])

    @given(st.lists(
        st.text(alphabet="".join(map(chr, (0x21, 0x22, 0x23, 0x24))), max_size=8),
        min_size=1, max_size=12),
        st.lists(st.sets(st.sampled_from((0x21, 0x22, 0x23, 0x24)), min_size=1),
                 min_size=1, max_size=4))
    def test_monotone_and_prefix_consistent(self, sequences, stage_sets):
        sessions = [record(s, session_id=f"ck{i}") for i, s in enumerate(sequences)]
        stages = [symbol_class(*s) for s in stage_sets]
        result = funnel(sessions, stages)
        assert all(a >= b for a, b in
                   zip(result.stage_counts, result.stage_counts[1:]))
        for k in range(1, len(stages) + 1):
            prefix = funnel(sessions, stages[:k])
            assert prefix.stage_counts == result.stage_counts[:k]

    def test_matches_greedy_oracle_on_random_days(self, rng):
        for trial in range(10):
            _, d, sessions = prepared_day(rng, 200)
            patterns = [compile_pattern(p) for p in
                        rng.sample(["web:*", "iphone:*", "*:click_*",
                                    "*:view_*", "*", "android:*"], 3)]
            stages = [expand_pattern(d, p) for p in patterns]
            result = funnel(sessions, stages, sessions_key=d.key)
            name_sets = [
                {n for n in d.names() if p.matches(n)} for p in patterns
            ]
            oracle = [0] * len(stages)
            for r in sessions:
                depth = brute_depth(decode_sequence(d, r.session_sequence),
                                    name_sets)
                for k in range(depth):
                    oracle[k] += 1
            assert list(result.stage_counts) == oracle


class TestFunnelUniqueUsers:
    A = 0x21

    def test_two_sessions_same_user_deduplicate(self):
        sessions = [record(chr(self.A), user_id=5, session_id="s1"),
                    record(chr(self.A), user_id=5, session_id="s2")]
        result = funnel_unique_users(sessions, [symbol_class(self.A)])
        assert result.stage_counts == (1,)

    def test_logged_out_pseudo_users_keyed_by_cookie(self):
        sessions = [record(chr(self.A), user_id=None, session_id="c1"),
                    record(chr(self.A), user_id=None, session_id="c1"),
                    record(chr(self.A), user_id=None, session_id="c2")]
        result = funnel_unique_users(sessions, [symbol_class(self.A)])
        assert result.stage_counts == (2,)

    def test_user_counts_bounded_by_session_counts(self, rng):
        for trial in range(8):
            _, d, sessions = prepared_day(rng, 150)
            stages = [expand_pattern(d, compile_pattern(p))
                      for p in ("web:*", "*:click_*")]
            by_users = funnel_unique_users(sessions, stages)
            by_sessions = funnel(sessions, stages)
            assert all(u <= s for u, s in zip(by_users.stage_counts,
                                              by_sessions.stage_counts))

    def test_user_allowlist_applies_to_funnels(self, rng):
        _, d, sessions = prepared_day(rng, 200)
        stages = [expand_pattern(d, compile_pattern("*"))]
        restricted = funnel(sessions, stages, user_allowlist={2})
        oracle = sum(1 for r in sessions if r.user_id == 2)
        assert restricted.stage_counts == (oracle,)

    def test_matches_brute_force_dedup(self, rng):
        _, d, sessions = prepared_day(rng, 200)
        patterns = [compile_pattern("web:*"), compile_pattern("*:impression_*")]
        stages = [expand_pattern(d, p) for p in patterns]
        result = funnel_unique_users(sessions, stages)
        name_sets = [{n for n in d.names() if p.matches(n)} for p in patterns]
        per_stage = [set() for _ in stages]
        for r in sessions:
            depth = brute_depth(decode_sequence(d, r.session_sequence), name_sets)
            key = ("u", r.user_id) if r.user_id is not None \
                else ("s", r.session_id)
            for k in range(depth):
                per_stage[k].add(key)
        assert result.stage_counts == tuple(len(s) for s in per_stage)


class TestRollup:
    def test_six_tables(self, rng):
        tables = rollup(random_corpus(rng, 100))
        assert [t.level for t in tables] == [0, 1, 2, 3, 4, 5]

    def test_single_event_appears_once_per_level(self):
        tables = rollup([make_event(
            name="web:home:mentions:stream:avatar:profile_click", user_id=9)])
        expected_keys = [
            ("web", "home", "mentions", "stream", "avatar", "profile_click"),
            ("web", "home", "mentions", "stream", WILDCARD, "profile_click"),
            ("web", "home", "mentions", WILDCARD, WILDCARD, "profile_click"),
            ("web", "home", WILDCARD, WILDCARD, WILDCARD, "profile_click"),
            ("web", WILDCARD, WILDCARD, WILDCARD, WILDCARD, "profile_click"),
            ("web", "profile_click"),
        ]
        for table, key in zip(tables, expected_keys):
            assert set(table.rows) == {key}
            assert table.rows[key].total == 1
            assert table.rows[key].logged_in == 1

    def test_differing_elements_collapse_at_level_one(self):
        events = [
            make_event(name="web:home:mentions:stream:avatar:click"),
            make_event(name="web:home:mentions:stream:button:click"),
        ]
        tables = rollup(events)
        assert len(tables[0].rows) == 2
        level1 = tables[1].rows
        key = ("web", "home", "mentions", "stream", WILDCARD, "click")
        assert len(level1) == 1 and level1[key].total == 2

    def test_conservation_and_aggregation(self, rng):
        for trial in range(8):
            events = random_corpus(rng, rng.randint(20, 300))
            tables = rollup(events)
            for table in tables:
                assert table.total_events() == len(events)
                for cell in table.rows.values():
                    assert cell.logged_in + cell.logged_out == cell.total
            # every finer table aggregates exactly to the next coarser one
            from sessionseq.queries import _rollup_key
            for finer, coarser in zip(tables, tables[1:]):
                regrouped = defaultdict(lambda: [0, 0])
                for key, cell in finer.rows.items():
                    parts = key if len(key) == 6 else None
                    assert parts is not None
                    up = _rollup_key(parts, coarser.level)
                    regrouped[up][0] += cell.logged_in
                    regrouped[up][1] += cell.logged_out
                assert {k: (c.logged_in, c.logged_out)
                        for k, c in coarser.rows.items()} == \
                    {k: tuple(v) for k, v in regrouped.items()}


class TestSummaryStats:
    def test_bucket_placement_example(self):
        sessions = [record("!", duration=0, session_id="a"),
                    record("!", duration=30, session_id="b"),
                    record("!", duration=4000, session_id="c")]
        d = build_dictionary([make_event(name="web:a::::go")], built_for=DAY)
        stats = summary_stats(sessions, d)
        assert stats.sessions_total == 3
        assert stats.duration_histogram == {
            "0s": 1, "(0,10s]": 0, "(10,60s]": 1,
            "(1,5min]": 0, "(5,30min]": 0, ">30min": 1,
        }

    def test_bucket_edges(self):
        assert duration_bucket(0) == "0s"
        assert duration_bucket(1) == "(0,10s]"
        assert duration_bucket(10) == "(0,10s]"
        assert duration_bucket(11) == "(10,60s]"
        assert duration_bucket(60) == "(10,60s]"
        assert duration_bucket(61) == "(1,5min]"
        assert duration_bucket(300) == "(1,5min]"
        assert duration_bucket(301) == "(5,30min]"
        assert duration_bucket(1800) == "(5,30min]"
        assert duration_bucket(1801) == ">30min"

    def test_client_attribution_uses_first_event(self, rng):
        events, d, sessions = prepared_day(rng, 200)
        stats = summary_stats(sessions, d)
        oracle = Counter(
            decode_sequence(d, r.session_sequence)[0].split(":")[0]
            for r in sessions)
        assert stats.sessions_by_client == dict(oracle)
        assert stats.date == DAY

    def test_buckets_and_clients_sum_to_total(self, rng):
        for trial in range(6):
            _, d, sessions = prepared_day(rng, rng.randint(30, 250))
            stats = summary_stats(sessions, d)
            assert sum(stats.duration_histogram.values()) == stats.sessions_total
            assert sum(stats.sessions_by_client.values()) == stats.sessions_total
            assert set(stats.duration_histogram) == set(DURATION_BUCKETS)

    def test_empty_day(self):
        d = build_dictionary([make_event(name="web:a::::go")], built_for=DAY)
        stats = summary_stats([], d)
        assert stats.sessions_total == 0
        assert stats.sessions_by_client == {}
        assert sum(stats.duration_histogram.values()) == 0
