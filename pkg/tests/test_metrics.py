import pytest
from hypothesis import given
from hypothesis import strategies as st

from webtriage.corpus import Label
from webtriage.errors import DatasetFormatError
from webtriage.metrics import ConfusionMatrix, confusion, f1_score, geval_evaluate, metrics

# Published per-model scores: (name, F1, Acc, Prec, Rec) in percent.
CLASSIFIER_ROWS = [
    ("baseline", 50.98, 97.90, 67.53, 40.95),
    ("variant-a", 59.39, 98.30, 81.66, 46.66),
    ("variant-b", 61.77, 98.32, 78.81, 50.79),
    ("variant-c", 64.44, 98.37, 77.33, 55.23),
    ("variant-d", 66.17, 98.45, 79.20, 56.82),
    ("variant-e", 67.26, 98.47, 78.15, 59.04),
    ("best", 71.07, 98.52, 74.13, 68.25),
]


def planted_labels(tp=50, fp=20, fn=30, tn=900):
    preds = [1] * tp + [1] * fp + [0] * fn + [0] * tn
    gold = [1] * tp + [0] * fp + [1] * fn + [0] * tn
    return preds, gold


class TestConfusion:
    def test_perfect_two_pairs(self):
        cm = confusion([1, 0], [1, 0])
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 0, 0)

    def test_all_false_positive(self):
        assert confusion([1, 1], [0, 0]).fp == 2

    def test_planted_thousand_pair_fixture(self):
        cm = confusion(*planted_labels())
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (50, 20, 30, 900)
        assert cm.total == 1000

    def test_accepts_label_enums(self):
        cm = confusion([Label.INTERESTING], [Label.NOT_INTERESTING])
        assert cm.fp == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            confusion([1], [1, 0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            confusion([], [])


class TestMetrics:
    @pytest.mark.parametrize("name,f1,acc,prec,rec", CLASSIFIER_ROWS)
    def test_f1_consistent_with_published_precision_recall(self, name, f1, acc, prec, rec):
        computed = 100.0 * f1_score(prec / 100.0, rec / 100.0)
        assert computed == pytest.approx(f1, abs=0.02), name

    def test_degenerate_all_true_negative(self):
        report = metrics(ConfusionMatrix(tp=0, fp=0, fn=0, tn=10))
        assert report.precision == report.recall == report.f1 == 0.0
        assert report.accuracy == 1.0

    def test_exact_rational_values(self):
        report = metrics(ConfusionMatrix(tp=50, fp=20, fn=30, tn=900))
        assert report.precision == 5 / 7
        assert report.recall == 5 / 8
        assert report.f1 == pytest.approx(2 / 3, abs=1e-15)

    def test_percent_rendering(self):
        pcts = metrics(ConfusionMatrix(tp=50, fp=20, fn=30, tn=900)).as_percentages()
        assert pcts == {"f1": 66.67, "accuracy": 95.00, "precision": 71.43, "recall": 62.50}

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            metrics(ConfusionMatrix(0, 0, 0, 0))

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, fp=0, fn=0, tn=1)


@st.composite
def label_pairs(draw):
    n = draw(st.integers(1, 200))
    preds = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    gold = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    return preds, gold


class TestMetricProperties:
    @given(label_pairs())
    def test_swapping_roles_swaps_precision_and_recall(self, pair):
        preds, gold = pair
        forward = metrics(confusion(preds, gold))
        backward = metrics(confusion(gold, preds))
        assert forward.accuracy == backward.accuracy
        assert forward.precision == backward.recall
        assert forward.recall == backward.precision

    @given(label_pairs())
    def test_f1_between_min_and_max_of_components(self, pair):
        report = metrics(confusion(*pair))
        if report.precision > 0 and report.recall > 0:
            assert min(report.precision, report.recall) <= report.f1
            assert report.f1 <= max(report.precision, report.recall)

    @given(label_pairs(), st.randoms(use_true_random=False))
    def test_joint_permutation_invariance(self, pair, rng):
        preds, gold = pair
        order = list(range(len(preds)))
        rng.shuffle(order)
        a = metrics(confusion(preds, gold))
        b = metrics(confusion([preds[i] for i in order], [gold[i] for i in order]))
        assert a == b

    @given(label_pairs())
    def test_f1_always_in_unit_interval(self, pair):
        report = metrics(confusion(*pair))
        assert 0.0 <= report.f1 <= 1.0


class TestGevalEvaluate:
    def write(self, path, tokens):
        path.write_text("".join(f"{t}\n" for t in tokens), encoding="utf-8")

    def test_identical_files_score_one(self, tmp_path):
        self.write(tmp_path / "expected.tsv", [1, 0, 1])
        self.write(tmp_path / "out.tsv", [1, 0, 1])
        assert geval_evaluate(tmp_path / "expected.tsv", tmp_path / "out.tsv") == 1.0

    def test_planted_confusion_scores_two_thirds(self, tmp_path):
        preds, gold = planted_labels()
        self.write(tmp_path / "expected.tsv", gold)
        self.write(tmp_path / "out.tsv", preds)
        f1 = geval_evaluate(tmp_path / "expected.tsv", tmp_path / "out.tsv")
        assert f"{f1:.6f}" == "0.666667"

    def test_short_out_file_reports_both_counts(self, tmp_path):
        self.write(tmp_path / "expected.tsv", [1, 0, 1])
        self.write(tmp_path / "out.tsv", [1, 0])
        with pytest.raises(DatasetFormatError, match="3.*2"):
            geval_evaluate(tmp_path / "expected.tsv", tmp_path / "out.tsv")

    def test_invalid_token_reports_line(self, tmp_path):
        self.write(tmp_path / "expected.tsv", [1, "x", 1])
        self.write(tmp_path / "out.tsv", [1, 0, 1])
        with pytest.raises(DatasetFormatError, match=":2"):
            geval_evaluate(tmp_path / "expected.tsv", tmp_path / "out.tsv")
