import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tta_lab import (
    EmptyFile,
    MissingColumn,
    NonNumericCell,
    PredictionSet,
    RaggedRows,
    UnexpectedColumn,
    load_predictions,
    write_predictions,
)
from tta_lab.io import dumps_report, outcomes_to_csv
from tta_lab.simulator import TrialOutcome


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestCsv:
    def test_two_rows(self, tmp_path):
        p = write(tmp_path, "d.csv", "sample_id,label,pred_flip,pred_crop\n0,1.0,1.5,0.5\n1,2,2.5,1\n")
        d = load_predictions(p)
        assert (d.n_samples, d.n_augmentations) == (2, 2)
        assert d.augmentation_names == ("flip", "crop")
        np.testing.assert_array_equal(d.predictions, [[1.5, 0.5], [2.5, 1.0]])

    def test_nan_cell_named(self, tmp_path):
        p = write(tmp_path, "d.csv", "sample_id,label,pred_a\n0,1,2\n1,1,nan\n")
        with pytest.raises(NonNumericCell) as exc:
            load_predictions(p)
        assert exc.value.row == 3 and exc.value.column == "pred_a"
        assert "row 3" in str(exc.value)

    def test_text_cell(self, tmp_path):
        p = write(tmp_path, "d.csv", "sample_id,label,pred_a\n0,abc,2\n")
        with pytest.raises(NonNumericCell) as exc:
            load_predictions(p)
        assert exc.value.column == "label"

    def test_ragged(self, tmp_path):
        p = write(tmp_path, "d.csv", "sample_id,label,pred_a,pred_b\n0,1,2,3\n1,1,2\n")
        with pytest.raises(RaggedRows) as exc:
            load_predictions(p)
        assert exc.value.row == 3

    def test_missing_label(self, tmp_path):
        p = write(tmp_path, "d.csv", "sample_id,pred_a\n0,1\n")
        with pytest.raises(MissingColumn) as exc:
            load_predictions(p)
        assert exc.value.column == "label"

    def test_no_prediction_columns(self, tmp_path):
        with pytest.raises(MissingColumn):
            load_predictions(write(tmp_path, "d.csv", "sample_id,label\n0,1\n"))

    def test_unexpected_column(self, tmp_path):
        with pytest.raises(UnexpectedColumn):
            load_predictions(write(tmp_path, "d.csv", "sample_id,label,score\n0,1,2\n"))

    @pytest.mark.parametrize("text", ["", "sample_id,label,pred_a\n"])
    def test_empty(self, tmp_path, text):
        with pytest.raises(EmptyFile):
            load_predictions(write(tmp_path, "d.csv", text))


class TestJson:
    def test_parse_keeps_key_order(self, tmp_path):
        doc = {"labels": [0, 1], "predictions": {"z": [1, 2], "a": [3, 4]}}
        d = load_predictions(write(tmp_path, "d.json", json.dumps(doc)))
        assert d.augmentation_names == ("z", "a")
        np.testing.assert_array_equal(d.predictions, [[1, 3], [2, 4]])

    def test_mismatched_lengths(self, tmp_path):
        doc = {"labels": [0, 1], "predictions": {"a": [1, 2], "b": [1]}}
        with pytest.raises(RaggedRows) as exc:
            load_predictions(write(tmp_path, "d.json", json.dumps(doc)))
        assert exc.value.column == "b"

    def test_null_cell(self, tmp_path):
        doc = {"labels": [0, 1], "predictions": {"a": [1, None]}}
        with pytest.raises(NonNumericCell) as exc:
            load_predictions(write(tmp_path, "d.json", json.dumps(doc)))
        assert (exc.value.row, exc.value.column) == (1, "a")

    def test_missing_key(self, tmp_path):
        with pytest.raises(MissingColumn):
            load_predictions(write(tmp_path, "d.json", json.dumps({"labels": [1]})))

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyFile):
            load_predictions(write(tmp_path, "d.json", ""))
        with pytest.raises(EmptyFile):
            load_predictions(write(tmp_path, "e.json", '{"labels": [], "predictions": {"a": []}}'))


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60, deadline=None)
@given(
    data=st.integers(1, 6).flatmap(
        lambda m: st.tuples(
            st.integers(1, 8).flatmap(lambda n: st.tuples(arrays(np.float64, n, elements=finite),
                                                          arrays(np.float64, (n, m), elements=finite))),
        )
    ),
    fmt=st.sampled_from(["csv", "json"]),
)
def test_round_trip_is_exact(tmp_path_factory, data, fmt):
    (labels, preds), = data
    d = PredictionSet(labels, preds)
    path = tmp_path_factory.mktemp("rt") / f"d.{fmt}"
    write_predictions(d, path)
    assert load_predictions(path) == d


class TestReportSerialization:
    def test_sorted_keys_and_17_digits(self):
        text = dumps_report({"b": 0.1, "a": [1, 2.5], "c": {"y": True, "x": None}})
        assert text.index('"a"') < text.index('"b"') < text.index('"c"')
        assert "0.10000000000000001" in text
        assert json.loads(text)["b"] == 0.1

    def test_non_finite_as_strings(self):
        doc = json.loads(dumps_report({"cond": float("inf"), "v": [float("-inf")]}))
        assert doc == {"cond": "inf", "v": ["-inf"]}

    def test_numpy_values(self):
        doc = json.loads(dumps_report({"g": np.eye(2), "k": np.int64(3), "f": np.float64(0.5)}))
        assert doc == {"g": [[1, 0], [0, 1]], "k": 3, "f": 0.5}

    def test_fig1_csv_columns(self):
        text = outcomes_to_csv([TrialOutcome(0.33, 0.375, 8, (True,) * 3 + (False,) * 5)], seed=4)
        assert text.splitlines() == ["rho,probability_holds,trials,seed", "0.33000000000000002,0.375,8,4"]
