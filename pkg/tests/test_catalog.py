import re
from datetime import date

import pytest

from sessionseq import (
    build_dictionary,
    compile_pattern,
    generate_catalog,
    load_descriptions,
    save_descriptions,
    search_catalog,
)

from conftest import make_event, random_corpus

DAY = date(2024, 5, 1)


@pytest.fixture
def dictionary(rng):
    return build_dictionary(random_corpus(rng, 300, n_names=14),
                            sample_size=2, built_for=DAY)


def snapshot(directory):
    return {
        str(p.relative_to(directory)): p.read_bytes()
        for p in sorted(directory.rglob("*")) if p.is_file()
    }


class TestGenerate:
    def test_one_page_per_dictionary_event(self, dictionary, tmp_path):
        report = generate_catalog(dictionary, {}, tmp_path)
        pages = sorted((tmp_path / "events").glob("*.md"))
        assert len(pages) == len(dictionary)
        assert report.total == len(dictionary)
        slugs = {p.name for p in pages}
        assert slugs == {n.replace(":", ".") + ".md" for n in dictionary.names()}

    def test_every_event_linked_once_in_index(self, dictionary, tmp_path):
        generate_catalog(dictionary, {}, tmp_path)
        index = (tmp_path / "index.md").read_text(encoding="utf-8")
        links = re.findall(r"\]\(events/([^)]+)\)", index)
        assert sorted(links) == sorted(
            n.replace(":", ".") + ".md" for n in dictionary.names())

    def test_coverage_and_stale_reporting(self, dictionary, tmp_path):
        names = dictionary.names()
        descriptions = {
            names[0]: "fires on every widget impression",
            "web:gone:::x:done": "references an event that no longer exists",
        }
        report = generate_catalog(dictionary, descriptions, tmp_path)
        assert report.documented == 1
        assert report.stale_descriptions == ["web:gone:::x:done"]
        index = (tmp_path / "index.md").read_text(encoding="utf-8")
        assert f"Documented: 1/{len(dictionary)}" in index
        assert "web:gone:::x:done" in index

    def test_undocumented_marker_and_description_text(self, dictionary, tmp_path):
        names = dictionary.names()
        generate_catalog(dictionary, {names[0]: "described here"}, tmp_path)
        described = (tmp_path / "events" /
                     (names[0].replace(":", ".") + ".md")).read_text("utf-8")
        assert "described here" in described
        other = (tmp_path / "events" /
                 (names[1].replace(":", ".") + ".md")).read_text("utf-8")
        assert "_Undocumented._" in other

    def test_samples_rendered_on_pages(self, dictionary, tmp_path):
        generate_catalog(dictionary, {}, tmp_path)
        entry = dictionary.entries[0]
        page = (tmp_path / "events" /
                (entry.name.replace(":", ".") + ".md")).read_text("utf-8")
        assert "```json" in page
        assert entry.samples[0]["session_id"] in page
        assert f"Count: {entry.count}." in page

    def test_regeneration_is_byte_identical(self, dictionary, tmp_path):
        descriptions = {dictionary.names()[2]: "some text"}
        first_dir = tmp_path / "a"
        second_dir = tmp_path / "b"
        generate_catalog(dictionary, descriptions, first_dir)
        generate_catalog(dictionary, descriptions, second_dir)
        assert snapshot(first_dir) == snapshot(second_dir)
        # regenerating in place is stable too
        generate_catalog(dictionary, descriptions, first_dir)
        assert snapshot(first_dir) == snapshot(second_dir)

    def test_whitespace_description_counts_as_undocumented(self, dictionary,
                                                           tmp_path):
        report = generate_catalog(dictionary,
                                  {dictionary.names()[0]: "   "}, tmp_path)
        assert report.documented == 0

    def test_empty_dictionary_produces_empty_catalog(self, tmp_path):
        empty = build_dictionary([], built_for=DAY)
        report = generate_catalog(empty, {}, tmp_path)
        assert report.total == 0
        assert "Documented: 0/0" in (tmp_path / "index.md").read_text("utf-8")
        assert list((tmp_path / "events").glob("*.md")) == []


class TestSearch:
    def test_universal_pattern_returns_everything(self, dictionary):
        hits = search_catalog(dictionary, compile_pattern("*"))
        assert {h.event_name for h in hits} == set(dictionary.names())

    def test_ordering_by_count_then_name(self, dictionary):
        hits = search_catalog(dictionary, compile_pattern("*"))
        keys = [(-h.count, h.event_name) for h in hits]
        assert keys == sorted(keys)

    def test_prefix_search(self):
        events = [make_event(name="web:home:mentions:stream:avatar:click"),
                  make_event(name="web:home::::view"),
                  make_event(name="iphone:home::::view")]
        d = build_dictionary(events, built_for=DAY)
        hits = search_catalog(d, compile_pattern("web:home:*"))
        assert {h.event_name for h in hits} == {
            "web:home:mentions:stream:avatar:click", "web:home::::view"}

    def test_non_matching_pattern_returns_empty(self, dictionary):
        assert search_catalog(dictionary, compile_pattern("tv:*")) == []

    def test_descriptions_attach_to_results(self, dictionary):
        name = dictionary.names()[0]
        hits = search_catalog(dictionary, compile_pattern("*"),
                              descriptions={name: "annotated"})
        hit = next(h for h in hits if h.event_name == name)
        assert hit.documented and hit.description == "annotated"
        assert all(not h.documented for h in hits if h.event_name != name)


class TestDescriptionsFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "descriptions.tsv"
        data = {"web:home::::view": "home page view",
                "web:a::::b": "something else"}
        save_descriptions(data, path)
        assert load_descriptions(path) == data

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "descriptions.tsv"
        path.write_text("# comment\n\nweb:a::::b\ttext here\n", encoding="utf-8")
        assert load_descriptions(path) == {"web:a::::b": "text here"}

    def test_malformed_line_raises(self, tmp_path):
        path = tmp_path / "descriptions.tsv"
        path.write_text("no tab separator on this line\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_descriptions(path)
