import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from figharvest.geometry import BBox
from figharvest.interchange import (
    InterchangeError,
    Prediction,
    PredictionSet,
    iter_jsonl,
    labels_as_predictions,
    read_labels_file,
    read_predictions_file,
    write_labels_file,
    write_predictions_file,
)
from figharvest.labels import LabelClass, LabelSource, PageLabels, RegionLabel


def lab(i, x, cls="figure"):
    return RegionLabel(label_id=f"g{i:04d}", bbox=BBox(x, 0, x + 10, 10),
                       cls=LabelClass(cls))


class TestPrediction:
    def test_confidence_bounds(self):
        Prediction(BBox(0, 0, 1, 1), LabelClass.FIGURE, 0.0)
        Prediction(BBox(0, 0, 1, 1), LabelClass.FIGURE, 1.0)
        with pytest.raises(ValueError, match="confidence"):
            Prediction(BBox(0, 0, 1, 1), LabelClass.FIGURE, 1.5)
        with pytest.raises(ValueError, match="confidence"):
            Prediction(BBox(0, 0, 1, 1), LabelClass.FIGURE, -0.1)


class TestIterJsonl:
    def test_skips_blank_lines(self, tmp_path):
        p = tmp_path / "f.jsonl"
        p.write_text('{"a": 1}\n\n   \n{"b": 2}\n')
        assert [rec for _, rec in iter_jsonl(p)] == [{"a": 1}, {"b": 2}]

    def test_line_numbers(self, tmp_path):
        p = tmp_path / "f.jsonl"
        p.write_text('{"a": 1}\n\n{"b": 2}\n')
        assert [n for n, _ in iter_jsonl(p)] == [1, 3]

    def test_bad_json_names_line(self, tmp_path):
        p = tmp_path / "f.jsonl"
        p.write_text('{"a": 1}\nnot json\n')
        with pytest.raises(InterchangeError, match=r"f\.jsonl:2"):
            list(iter_jsonl(p))

    def test_non_object_rejected(self, tmp_path):
        p = tmp_path / "f.jsonl"
        p.write_text('[1, 2]\n')
        with pytest.raises(InterchangeError, match="expected an object"):
            list(iter_jsonl(p))


class TestLabelsFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        pages = [
            PageLabels("p1", [lab(0, 0), lab(1, 20, "table")]),
            PageLabels("p2", []),
        ]
        write_labels_file(path, pages)
        back = read_labels_file(path)
        assert list(back) == ["p1", "p2"]
        assert [l.bbox for l in back["p1"].labels] == [l.bbox for l in pages[0].labels]
        assert [l.cls for l in back["p1"].labels] == [LabelClass.FIGURE, LabelClass.TABLE]
        assert back["p2"].labels == []

    def test_exactly_five_keys_per_label(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        write_labels_file(path, [PageLabels("p1", [
            RegionLabel("x", BBox(0, 0, 1, 1), LabelClass.FIGURE,
                        source=LabelSource.MACHINE, category="Bars")])])
        rec = json.loads(path.read_text())
        assert set(rec["labels"][0]) == {"x_min", "y_min", "x_max", "y_max", "class"}

    def test_reader_assigns_sequential_ids(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        write_labels_file(path, [PageLabels("p1", [lab(0, 0), lab(1, 20)])])
        back = read_labels_file(path)
        assert [l.label_id for l in back["p1"].labels] == ["g0000", "g0001"]

    def test_source_parameter(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        write_labels_file(path, [PageLabels("p1", [lab(0, 0)])])
        back = read_labels_file(path, source=LabelSource.MACHINE)
        assert back["p1"].labels[0].source is LabelSource.MACHINE

    def test_duplicate_page_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        line = json.dumps({"page_id": "p1", "labels": []})
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(InterchangeError, match="duplicate page_id"):
            read_labels_file(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "labels": [
            {"x_min": 0, "y_min": 0, "x_max": 1, "class": "figure"}]}) + "\n")
        with pytest.raises(InterchangeError, match="missing field 'y_max'"):
            read_labels_file(path)

    def test_bad_class_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "labels": [
            {"x_min": 0, "y_min": 0, "x_max": 1, "y_max": 1, "class": "chart"}]}) + "\n")
        with pytest.raises(InterchangeError, match="'class' must be one of"):
            read_labels_file(path)

    def test_degenerate_bbox_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "labels": [
            {"x_min": 5, "y_min": 0, "x_max": 5, "y_max": 1, "class": "figure"}]}) + "\n")
        with pytest.raises(InterchangeError, match="invalid bbox"):
            read_labels_file(path)

    def test_non_numeric_coordinate_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "labels": [
            {"x_min": "0", "y_min": 0, "x_max": 1, "y_max": 1, "class": "figure"}]}) + "\n")
        with pytest.raises(InterchangeError, match="must be a number"):
            read_labels_file(path)

    @given(raw=st.lists(
        st.tuples(st.integers(0, 500), st.integers(0, 500),
                  st.integers(1, 100), st.integers(1, 100),
                  st.sampled_from(["figure", "table"])),
        max_size=8))
    @settings(max_examples=50)
    def test_round_trip_property(self, tmp_path_factory, raw):
        tmp = tmp_path_factory.mktemp("rt")
        labels = [RegionLabel(f"g{i:04d}", BBox(x, y, x + w, y + h), LabelClass(c))
                  for i, (x, y, w, h, c) in enumerate(raw)]
        path = tmp / "labels.jsonl"
        write_labels_file(path, [PageLabels("p", labels)])
        back = read_labels_file(path)["p"].labels
        assert [(l.bbox, l.cls) for l in back] == [(l.bbox, l.cls) for l in labels]


class TestPredictionsFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        sets = [PredictionSet("p1", "det", [
            Prediction(BBox(0, 0, 10, 10), LabelClass.FIGURE, 0.75),
            Prediction(BBox(20, 0, 30, 10), LabelClass.TABLE, 1.0),
        ])]
        write_predictions_file(path, sets)
        back = read_predictions_file(path)
        assert back["p1"].detector_id == "det"
        assert [(p.bbox, p.cls, p.confidence) for p in back["p1"].predictions] == \
            [(p.bbox, p.cls, p.confidence) for p in sets[0].predictions]

    def test_multi_line_pages_merge(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        rec1 = {"page_id": "p1", "detector_id": "a", "predictions": [
            {"x_min": 0, "y_min": 0, "x_max": 1, "y_max": 1,
             "class": "figure", "confidence": 0.5}]}
        rec2 = {"page_id": "p1", "detector_id": "b", "predictions": [
            {"x_min": 2, "y_min": 0, "x_max": 3, "y_max": 1,
             "class": "figure", "confidence": 0.6}]}
        path.write_text(json.dumps(rec1) + "\n" + json.dumps(rec2) + "\n")
        back = read_predictions_file(path)
        assert back["p1"].detector_id == "a+b"
        assert len(back["p1"].predictions) == 2

    def test_same_detector_merge_keeps_single_id(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        rec = {"page_id": "p1", "detector_id": "a", "predictions": []}
        path.write_text(json.dumps(rec) + "\n" + json.dumps(rec) + "\n")
        assert read_predictions_file(path)["p1"].detector_id == "a"

    def test_bad_confidence_rejected(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "detector_id": "d",
                                    "predictions": [{"x_min": 0, "y_min": 0, "x_max": 1,
                                                     "y_max": 1, "class": "figure",
                                                     "confidence": 2.0}]}) + "\n")
        with pytest.raises(InterchangeError, match="confidence"):
            read_predictions_file(path)

    def test_missing_detector_id_rejected(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        path.write_text(json.dumps({"page_id": "p1", "predictions": []}) + "\n")
        with pytest.raises(InterchangeError, match="missing field 'detector_id'"):
            read_predictions_file(path)


class TestLabelsAsPredictions:
    def test_identity_conversion(self):
        pages = [PageLabels("p1", [lab(0, 0), lab(1, 20, "table")])]
        sets = labels_as_predictions(pages)
        assert len(sets) == 1
        assert sets[0].page_id == "p1"
        assert sets[0].detector_id == "identity"
        assert all(p.confidence == 1.0 for p in sets[0].predictions)
        assert [p.cls for p in sets[0].predictions] == [LabelClass.FIGURE, LabelClass.TABLE]
