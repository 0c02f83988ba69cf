from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webtriage.corpus import Label, Provenance
from webtriage.triage import (FeedbackEvent, FeedbackLabel, FeedbackStore, Thresholds,
                              TriageResult, UnknownSnippetError, Verdict, classify,
                              latest_by_snippet, merge_feedback, rank, should_retrain, verdict)

from conftest import make_labeled, make_snippet

T0 = datetime(2026, 2, 1, tzinfo=timezone.utc)


def event(sid="s000001", label=FeedbackLabel.CRIMINAL, minutes=0, operator="op1",
          prior=Verdict.RED):
    return FeedbackEvent(snippet_id=sid, label=label, prior_verdict=prior,
                         timestamp=T0 + timedelta(minutes=minutes), operator_id=operator)


class TestVerdict:
    def test_red_boundary_inclusive(self):
        assert verdict(0.7) is Verdict.RED

    def test_yellow_boundary_inclusive_and_below(self):
        assert verdict(0.3) is Verdict.YELLOW
        assert verdict(0.29999) is Verdict.GREEN

    def test_extremes(self):
        assert verdict(0.0) is Verdict.GREEN
        assert verdict(1.0) is Verdict.RED

    @pytest.mark.parametrize("p", [-0.01, 1.01, 2.0])
    def test_out_of_range_rejected(self, p):
        with pytest.raises(ValueError, match="outside"):
            verdict(p)

    def test_monotone_over_grid(self):
        order = {Verdict.GREEN: 0, Verdict.YELLOW: 1, Verdict.RED: 2}
        grid = [i / 100 for i in range(101)]
        levels = [order[verdict(p)] for p in grid]
        assert levels == sorted(levels)
        assert set(levels) == {0, 1, 2}  # partition actually uses all three bands

    def test_custom_threshold_validation(self):
        with pytest.raises(ValueError):
            Thresholds(red=0.3, yellow=0.3)
        with pytest.raises(ValueError):
            Thresholds(red=1.2, yellow=0.1)


class TestRank:
    def test_red_beats_higher_probability_yellow(self):
        red = classify(make_snippet(1), 0.71)
        yellow = classify(make_snippet(2), 0.69)
        assert rank([yellow, red]) == [red, yellow]

    def test_single_item(self):
        only = classify(make_snippet(1), 0.5)
        assert rank([only]) == [only]

    def test_against_comparison_sort_oracle(self):
        import random
        rng = random.Random(4)
        results = [classify(make_snippet(i), rng.random()) for i in range(100)]

        def independently_sorted(items):
            order = {Verdict.RED: 0, Verdict.YELLOW: 1, Verdict.GREEN: 2}
            out = list(items)
            # selection sort with an explicit comparator, no key reuse
            for i in range(len(out)):
                best = i
                for j in range(i + 1, len(out)):
                    a, b = out[j], out[best]
                    if (order[a.verdict], -a.probability, a.snippet.id) < \
                       (order[b.verdict], -b.probability, b.snippet.id):
                        best = j
                out[i], out[best] = out[best], out[i]
            return out

        assert rank(results) == independently_sorted(results)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), max_size=40), st.randoms(use_true_random=False))
    def test_idempotent_and_permutation_invariant(self, probs, rng):
        results = [classify(make_snippet(i), p) for i, p in enumerate(probs)]
        ranked = rank(results)
        assert rank(ranked) == ranked
        shuffled = list(results)
        rng.shuffle(shuffled)
        assert rank(shuffled) == ranked

    def test_probability_ties_break_by_id(self):
        a, b = classify(make_snippet(2), 0.9), classify(make_snippet(1), 0.9)
        assert [r.snippet.id for r in rank([a, b])] == [b.snippet.id, a.snippet.id]


class TestFeedbackStore:
    def test_first_event_counts(self, tmp_path):
        store = FeedbackStore(tmp_path / "journal.tsv")
        store.record(event())
        assert len(store) == 1
        assert store.decisions_since_retrain == 1

    def test_unknown_snippet_rejected(self, tmp_path):
        store = FeedbackStore(tmp_path / "journal.tsv", known_ids={"known"})
        with pytest.raises(UnknownSnippetError, match="nope"):
            store.record(event(sid="nope"))

    def test_replay_reproduces_state(self, tmp_path):
        path = tmp_path / "journal.tsv"
        store = FeedbackStore(path)
        store.record(event(sid="a", minutes=0))
        store.record(event(sid="b", minutes=1, label=FeedbackLabel.NON_CRIMINAL,
                           prior=Verdict.GREEN))
        store.mark_retrained("v2", at=T0 + timedelta(minutes=2))
        store.record(event(sid="c", minutes=3))

        replayed = FeedbackStore(path)
        assert replayed.events() == store.events()
        assert replayed.decisions_since_retrain == 1
        assert replayed.last_model_version == "v2"

    def test_events_are_append_only_on_disk(self, tmp_path):
        path = tmp_path / "journal.tsv"
        store = FeedbackStore(path)
        store.record(event(sid="a"))
        first = path.read_text()
        store.record(event(sid="b"))
        assert path.read_text().startswith(first)

    def test_should_retrain_threshold_and_reset(self, tmp_path):
        store = FeedbackStore(tmp_path / "journal.tsv")
        assert not should_retrain(store, 3)
        for i in range(3):
            store.record(event(sid=f"s{i}", minutes=i))
        assert should_retrain(store, 3)
        store.mark_retrained("v2")
        assert not should_retrain(store, 3)

    def test_default_threshold_is_500(self, tmp_path):
        store = FeedbackStore(tmp_path / "journal.tsv")
        for i in range(499):
            store.record(event(sid=f"s{i}"))
        assert not should_retrain(store)
        store.record(event(sid="s499"))
        assert should_retrain(store)

    def test_threshold_must_be_positive(self, tmp_path):
        store = FeedbackStore(tmp_path / "journal.tsv")
        with pytest.raises(ValueError, match=">= 1"):
            should_retrain(store, 0)


class TestMergeFeedback:
    def test_empty_store_leaves_base_unchanged(self, tmp_path):
        base = [make_labeled(1, Label.NOT_INTERESTING)]
        assert merge_feedback(base, FeedbackStore(tmp_path / "j.tsv")) == base

    def test_criminal_feedback_overrides_to_interesting(self):
        base = [make_labeled(1, Label.NOT_INTERESTING)]
        merged = merge_feedback(base, [event(sid="s000001", label=FeedbackLabel.CRIMINAL)])
        assert merged[0].label is Label.INTERESTING
        assert merged[0].provenance is Provenance.OPERATOR_FEEDBACK
        assert merged[0].snippet == base[0].snippet

    def test_latest_timestamp_wins(self):
        base = [make_labeled(1, Label.NOT_INTERESTING)]
        events = [event(sid="s000001", label=FeedbackLabel.CRIMINAL, minutes=5),
                  event(sid="s000001", label=FeedbackLabel.NON_CRIMINAL, minutes=1)]
        merged = merge_feedback(base, events)
        assert merged[0].label is Label.INTERESTING  # minute-5 event is latest

    def test_new_snippets_appended_via_registry(self):
        base = [make_labeled(1, Label.NOT_INTERESTING)]
        fresh = make_snippet(99)
        merged = merge_feedback(base, [event(sid=fresh.id)], {fresh.id: fresh})
        assert len(merged) == 2
        assert merged[1].snippet == fresh
        assert merged[1].label is Label.INTERESTING

    def test_unresolvable_snippet_rejected(self):
        with pytest.raises(ValueError, match="registry"):
            merge_feedback([], [event(sid="ghost")], {})

    def test_replay_determinism(self):
        events = [event(sid="a", minutes=0, label=FeedbackLabel.CRIMINAL),
                  event(sid="a", minutes=2, label=FeedbackLabel.NON_CRIMINAL),
                  event(sid="b", minutes=1, label=FeedbackLabel.CRIMINAL)]
        assert latest_by_snippet(events) == latest_by_snippet(list(events))
        lookup = {"a": make_snippet(901), "b": make_snippet(902)}
        merged_twice = [merge_feedback([], events, lookup) for _ in range(2)]
        assert merged_twice[0] == merged_twice[1]
        assert merged_twice[0][0].label is Label.NOT_INTERESTING  # 'a': latest is non_criminal


def test_triage_result_is_plain_data():
    result = TriageResult(snippet=make_snippet(1), probability=0.5, verdict=Verdict.YELLOW)
    assert result.verdict is Verdict.YELLOW
