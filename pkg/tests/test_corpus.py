from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webtriage.corpus import (EXPECTED_TSV, IN_TSV, DatasetFormatError, Label, Layout,
                              Snippet, Theme, distribution_report, read_dataset, read_labels,
                              read_snippets, stratified_split, write_dataset, write_snippets)

from conftest import THEME_COUNTS, TOTAL_COUNT, make_labeled


class TestSnippetValidation:
    def test_rejects_empty_id(self):
        with pytest.raises(ValueError, match="id"):
            Snippet(id="", query="q", engine="e", url="https://x.y/a",
                    title="t", snippet_text="text")

    def test_rejects_empty_text(self):
        with pytest.raises(ValueError, match="snippet_text"):
            Snippet(id="a", query="q", engine="e", url="https://x.y/a",
                    title="t", snippet_text="")

    @pytest.mark.parametrize("url", ["", "not a url", "www.example.com/path", "http://"])
    def test_rejects_invalid_url(self, url):
        with pytest.raises(ValueError, match="url"):
            Snippet(id="a", query="q", engine="e", url=url, title="t", snippet_text="x")


class TestReadWrite:
    def test_three_line_paired_read(self, tmp_path):
        (tmp_path / IN_TSV).write_text(
            "a\tq\te\thttps://x.y/1\tt1\ttext one\tDrugs\n"
            "b\tq\te\thttps://x.y/2\tt2\ttext two\t\n"
            "c\tq\te\thttps://x.y/3\tt3\ttext three\tAlcohol\n", encoding="utf-8")
        (tmp_path / EXPECTED_TSV).write_text("1\n0\n0\n", encoding="utf-8")
        records = read_dataset(tmp_path)
        assert len(records) == 3
        assert records[0].label is Label.INTERESTING
        assert records[0].snippet.theme is Theme.DRUGS
        assert records[1].snippet.theme is None
        assert [r.id for r in records] == ["a", "b", "c"]

    def test_malformed_label_token_names_line(self, tmp_path):
        path = tmp_path / EXPECTED_TSV
        path.write_text("1\n2\n0\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError, match=r":2.*'2'"):
            read_labels(path)

    def test_line_count_mismatch(self, tmp_path):
        (tmp_path / IN_TSV).write_text("a\tq\te\thttps://x.y/1\tt\ttxt\t\n", encoding="utf-8")
        (tmp_path / EXPECTED_TSV).write_text("1\n0\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError, match="line-count mismatch"):
            read_dataset(tmp_path)

    def test_non_utf8_reports_line(self, tmp_path):
        path = tmp_path / IN_TSV
        path.write_bytes("a\tq\te\thttps://x.y/1\tt\ttxt\t\n".encode() + b"\xff\xfe broken\n")
        with pytest.raises(DatasetFormatError, match=":2"):
            read_snippets(path)

    def test_empty_list_writes_zero_byte_files(self, tmp_path):
        write_dataset([], tmp_path / "out")
        assert (tmp_path / "out" / IN_TSV).read_bytes() == b""
        assert (tmp_path / "out" / EXPECTED_TSV).read_bytes() == b""

    def test_single_record_one_line_per_file(self, tmp_path):
        write_dataset([make_labeled(1, Label.INTERESTING)], tmp_path / "out")
        assert (tmp_path / "out" / IN_TSV).read_text().count("\n") == 1
        assert (tmp_path / "out" / EXPECTED_TSV).read_text() == "1\n"

    @pytest.mark.parametrize("layout", [Layout.PAIRED_IN_EXPECTED, Layout.SINGLE_FILE_LABELED])
    def test_round_trip_1000_records(self, tmp_path, layout):
        themes = list(Theme) + [None]
        records = [make_labeled(i, Label.INTERESTING if i % 41 == 0 else Label.NOT_INTERESTING,
                                theme=themes[i % len(themes)],
                                text=f"zażółć gęślą jaźń {i}")
                   for i in range(1000)]
        target = tmp_path / ("out" if layout is Layout.PAIRED_IN_EXPECTED else "out.tsv")
        write_dataset(records, target, layout)
        assert read_dataset(target, layout) == records

    def test_write_sanitizes_tabs_and_newlines(self, tmp_path):
        s = Snippet(id="a", query="q", engine="e", url="https://x.y/1", title="t\tb",
                    snippet_text="line1\nline2")
        write_snippets([s], tmp_path / IN_TSV)
        again = read_snippets(tmp_path / IN_TSV)[0]
        assert again.title == "t b"
        assert again.snippet_text == "line1 line2"


class TestStratifiedSplit:
    def test_all_in_train_with_unit_ratio(self):
        records = [make_labeled(i, Label.NOT_INTERESTING) for i in range(10)]
        split = stratified_split(records, (1, 0, 0), seed=3)
        assert split.sizes == (10, 0, 0)
        assert sorted(r.id for r in split.train) == sorted(r.id for r in records)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            stratified_split([], (1, 0, 0), seed=0)

    def test_negative_ratio_rejected(self):
        records = [make_labeled(i, Label.NOT_INTERESTING) for i in range(5)]
        with pytest.raises(ValueError, match="non-negative"):
            stratified_split(records, (1.2, -0.2, 0), seed=0)

    def test_ratios_must_sum_to_one(self):
        records = [make_labeled(i, Label.NOT_INTERESTING) for i in range(5)]
        with pytest.raises(ValueError, match="sum to 1"):
            stratified_split(records, (0.5, 0.2, 0.2), seed=0)

    def test_cell_counts_within_one_of_proportional_share(self):
        # 100 records, 2 themes, 10 positives: brute-force count per cell.
        records = []
        for i in range(100):
            theme = Theme.DRUGS if i < 60 else Theme.ALCOHOL
            label = Label.INTERESTING if i % 10 == 0 else Label.NOT_INTERESTING
            records.append(make_labeled(i, label, theme=theme))
        split = stratified_split(records, (0.8, 0.1, 0.1), seed=11)

        def cell_counts(part):
            counts = {}
            for r in part:
                key = (r.snippet.theme, r.label)
                counts[key] = counts.get(key, 0) + 1
            return counts

        global_counts = cell_counts(records)
        for ratio, part in zip((0.8, 0.1, 0.1), (split.train, split.validation, split.test)):
            counts = cell_counts(part)
            for cell, total in global_counts.items():
                assert abs(counts.get(cell, 0) - ratio * total) <= 1, (cell, ratio)

    def test_deterministic_for_fixed_seed(self):
        records = [make_labeled(i, Label.INTERESTING if i % 7 == 0 else Label.NOT_INTERESTING,
                                theme=list(Theme)[i % 3]) for i in range(200)]
        a = stratified_split(records, (0.7, 0.2, 0.1), seed=42)
        b = stratified_split(records, (0.7, 0.2, 0.1), seed=42)
        assert a == b
        c = stratified_split(records, (0.7, 0.2, 0.1), seed=43)
        assert a != c

    def test_duplicate_ids_rejected(self):
        records = [make_labeled(1, Label.NOT_INTERESTING)] * 2
        with pytest.raises(ValueError, match="duplicate"):
            stratified_split(records, (1, 0, 0), seed=0)

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 120), seed=st.integers(0, 2**16),
           cut=st.tuples(st.integers(0, 100), st.integers(0, 100)))
    def test_partition_property(self, n, seed, cut):
        lo, hi = sorted(cut)
        ratios = (Fraction(lo, 100), Fraction(hi - lo, 100), Fraction(100 - hi, 100))
        records = [make_labeled(i, Label.INTERESTING if i % 5 == 0 else Label.NOT_INTERESTING,
                                theme=list(Theme)[i % 4] if i % 3 else None)
                   for i in range(n)]
        split = stratified_split(records, ratios, seed=seed)
        ids = sorted(r.id for part in (split.train, split.validation, split.test) for r in part)
        assert ids == sorted(r.id for r in records)
        assert sum(split.sizes) == n
        for ratio, size in zip(ratios, split.sizes):
            assert abs(size - ratio * n) <= 1


class TestDistributionReport:
    def test_table_counts_and_percentages(self):
        records = []
        i = 0
        for theme, count in THEME_COUNTS.items():
            for _ in range(count):
                records.append(make_labeled(i, Label.NOT_INTERESTING, theme=theme))
                i += 1
        report = distribution_report(records)
        assert report.total == TOTAL_COUNT
        by_name = {row.name: row for row in report.themes}
        assert by_name["Cigarettes"].percent == 6.33
        assert by_name["WeaponsExplosives"].percent == 4.39
        assert by_name["Alcohol"].percent == 2.54
        assert by_name["SexCrime"].percent == 2.19
        assert by_name["HumanTrafficking"].percent == 1.02
        assert sum(row.count for row in report.themes) == report.total

    def test_drugs_share_rounds_to_70_exactly(self):
        # 80,107 / 114,432 = 70.0042...% -> 70.00 under half-up rounding.
        records = [make_labeled(i, Label.NOT_INTERESTING,
                                theme=Theme.DRUGS if i < 80_107 else Theme.ALCOHOL)
                   for i in range(TOTAL_COUNT)]
        report = distribution_report(records)
        assert report.themes[0].name == "Drugs"
        assert report.themes[0].percent == 70.00

    def test_single_theme_is_100(self):
        report = distribution_report([make_labeled(1, Label.INTERESTING, theme=Theme.DRUGS)])
        assert report.themes[0].percent == 100.00

    def test_empty_input(self):
        report = distribution_report([])
        assert report.total == 0
        assert report.themes == ()

    def test_half_up_rounding(self):
        # 1/800 = 0.125% exactly; half-up gives 0.13, not banker's 0.12.
        records = [make_labeled(i, Label.NOT_INTERESTING,
                                theme=Theme.DRUGS if i else Theme.ALCOHOL)
                   for i in range(800)]
        report = distribution_report(records)
        assert {row.name: row.percent for row in report.themes}["Alcohol"] == 0.13

    def test_unthemed_row_and_labels(self):
        records = [make_labeled(0, Label.INTERESTING, theme=None),
                   make_labeled(1, Label.NOT_INTERESTING, theme=Theme.DRUGS)]
        report = distribution_report(records)
        assert {row.name for row in report.themes} == {"Unthemed", "Drugs"}
        assert {row.name: row.count for row in report.labels} == {
            "Interesting": 1, "NotInteresting": 1}
