import json

import numpy as np
import pytest

from figharvest.evaluation import (
    EvalConfig,
    aggregate,
    effort_estimate,
    evaluate,
    fine_tune_rate,
    match_page,
    metrics,
)
from figharvest.geometry import BBox, iou
from figharvest.interchange import Prediction, PredictionSet
from figharvest.labels import LabelClass, PageLabels, RegionLabel
from oracles import exhaustive_max_tp

FIG = LabelClass.FIGURE
TAB = LabelClass.TABLE


def gt(i, box, cls=FIG):
    return RegionLabel(label_id=f"g{i:04d}", bbox=BBox(*box), cls=cls)


def pred(box, cls=FIG, conf=0.9):
    return Prediction(bbox=BBox(*box), cls=cls, confidence=conf)


class TestEvalConfig:
    def test_defaults(self):
        cfg = EvalConfig()
        assert cfg.iou_threshold == 0.8
        assert cfg.allow_multibox is True
        assert cfg.class_strict is True
        assert cfg.exact_tolerance == 0.995

    @pytest.mark.parametrize("kwargs", [
        {"iou_threshold": 0.0}, {"iou_threshold": 1.5},
        {"exact_tolerance": 0.0}, {"exact_tolerance": -1.0},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            EvalConfig(**kwargs)


class TestMatchPage:
    def test_empty_page(self):
        pm = match_page([], [], EvalConfig())
        assert pm.matches == [] and pm.false_positives == []
        assert pm.false_negatives == [] and pm.class_errors == []

    def test_exact_match(self):
        pm = match_page([gt(0, (10, 10, 100, 100))],
                        [pred((10, 10, 100, 100))], EvalConfig())
        assert len(pm.matches) == 1
        assert pm.matches[0].iou == 1.0
        assert pm.matches[0].pred_ids == (0,)
        assert pm.matches[0].multibox is False

    def test_threshold_is_inclusive(self):
        # intersection 80, union 100: IoU is exactly 0.8 as a double
        g = gt(0, (0, 0, 90, 1))
        p = pred((10, 0, 100, 1))
        assert iou(g.bbox, p.bbox) == 0.8
        pm = match_page([g], [p], EvalConfig(allow_multibox=False))
        assert len(pm.matches) == 1

    def test_just_below_threshold_fails(self):
        # intersection 79, union 100: IoU is exactly 0.79 as a double
        g = gt(0, (0, 0, 89.5, 1))
        p = pred((10.5, 0, 100, 1))
        assert iou(g.bbox, p.bbox) == 0.79
        pm = match_page([g], [p], EvalConfig(allow_multibox=False))
        assert pm.matches == []
        assert pm.false_positives == [0]
        assert pm.false_negatives == ["g0000"]

    def test_greedy_takes_highest_iou_first(self):
        g0 = gt(0, (0, 0, 100, 10))
        p_exact = pred((0, 0, 100, 10))
        p_close = pred((1, 0, 101, 10))
        pm = match_page([g0], [p_close, p_exact], EvalConfig())
        assert pm.matches[0].pred_ids == (1,)
        assert pm.matches[0].iou == 1.0

    def test_wrong_class_is_class_error_not_match(self):
        g = gt(0, (0, 0, 100, 100), cls=FIG)
        p = pred((0, 0, 100, 100), cls=TAB)
        pm = match_page([g], [p], EvalConfig())
        assert pm.matches == []
        assert len(pm.class_errors) == 1
        assert pm.class_errors[0].gt_id == "g0000"
        assert pm.class_errors[0].pred_id == 0
        # the prediction is consumed but the region still needs a box
        assert pm.false_positives == []
        assert pm.false_negatives == ["g0000"]

    def test_class_agnostic_mode_matches_across_classes(self):
        g = gt(0, (0, 0, 100, 100), cls=FIG)
        p = pred((0, 0, 100, 100), cls=TAB)
        pm = match_page([g], [p], EvalConfig(class_strict=False))
        assert len(pm.matches) == 1
        assert pm.class_errors == []

    def test_class_error_requires_threshold(self):
        g = gt(0, (0, 0, 100, 100), cls=FIG)
        p = pred((0, 0, 100, 50), cls=TAB)  # IoU 0.5
        pm = match_page([g], [p], EvalConfig())
        assert pm.class_errors == []
        assert pm.false_positives == [0]
        assert pm.false_negatives == ["g0000"]

    def test_multibox_joint_credit(self):
        g = gt(0, (0, 0, 100, 100))
        halves = [pred((0, 0, 100, 50)), pred((0, 50, 100, 100))]
        pm = match_page([g], halves, EvalConfig(allow_multibox=True))
        assert len(pm.matches) == 1
        m = pm.matches[0]
        assert m.multibox is True
        assert set(m.pred_ids) == {0, 1}
        assert m.iou == 1.0
        assert pm.false_positives == []

    def test_multibox_off_same_page(self):
        g = gt(0, (0, 0, 100, 100))
        halves = [pred((0, 0, 100, 50)), pred((0, 50, 100, 100))]
        pm = match_page([g], halves, EvalConfig(allow_multibox=False))
        assert pm.matches == []
        assert pm.false_positives == [0, 1]
        assert pm.false_negatives == ["g0000"]

    def test_multibox_needs_threshold(self):
        g = gt(0, (0, 0, 100, 100))
        # jointly cover only 60% of the region
        parts = [pred((0, 0, 100, 30)), pred((0, 30, 100, 60))]
        pm = match_page([g], parts, EvalConfig())
        assert pm.matches == []
        assert pm.false_positives == [0, 1]

    def test_multibox_ignores_disjoint_predictions(self):
        g = gt(0, (0, 0, 100, 100))
        parts = [pred((0, 0, 100, 55)), pred((0, 55, 100, 100)),
                 pred((500, 500, 600, 600))]
        pm = match_page([g], parts, EvalConfig())
        assert len(pm.matches) == 1
        assert set(pm.matches[0].pred_ids) == {0, 1}
        assert pm.false_positives == [2]

    def test_multibox_respects_class(self):
        g = gt(0, (0, 0, 100, 100), cls=FIG)
        parts = [pred((0, 0, 100, 50), cls=FIG), pred((0, 50, 100, 100), cls=TAB)]
        pm = match_page([g], parts, EvalConfig())
        assert pm.matches == []

    def test_greedy_shortfall_recorded_as_divergence(self):
        # p0 fits both regions, p1 fits only g0; greedy grabs (g0, p0)
        # at IoU 1.0 and strands the rest, while the optimal pairing
        # credits both regions
        g0 = gt(0, (10, 0, 110, 10))
        g1 = gt(1, (0, 0, 100, 10))
        p0 = pred((10, 0, 110, 10))
        p1 = pred((20, 0, 120, 10))
        cfg = EvalConfig(allow_multibox=False)
        pm = match_page([g0, g1], [p0, p1], cfg)
        assert len(pm.matches) == 1
        assert pm.divergence == {"greedy_tp": 1, "optimal_tp": 2,
                                 "n_gts": 2, "n_preds": 2}

    def test_divergence_check_skipped_on_large_pages(self):
        g0 = gt(0, (10, 0, 110, 10))
        g1 = gt(1, (0, 0, 100, 10))
        preds = [pred((10, 0, 110, 10)), pred((20, 0, 120, 10))]
        preds += [pred((1000 + 20 * i, 1000, 1010 + 20 * i, 1010)) for i in range(5)]
        pm = match_page([g0, g1], preds, EvalConfig(allow_multibox=False))
        assert pm.divergence is None

    def test_no_divergence_field_when_greedy_is_optimal(self):
        pm = match_page([gt(0, (0, 0, 10, 10))], [pred((0, 0, 10, 10))],
                        EvalConfig(allow_multibox=False))
        assert pm.divergence is None

    def test_partition_invariants_on_random_pages(self):
        rng = np.random.default_rng(5)
        cfg = EvalConfig()
        for _ in range(200):
            gts = [gt(i, _rand_box(rng), cls=FIG if rng.random() < 0.8 else TAB)
                   for i in range(rng.integers(0, 6))]
            preds = [pred(_rand_box(rng), cls=FIG if rng.random() < 0.8 else TAB)
                     for _ in range(rng.integers(0, 6))]
            pm = match_page(gts, preds, cfg)
            # every region is either credited or missing
            assert len(pm.matches) + len(pm.false_negatives) == len(gts)
            # every prediction is consumed exactly once
            consumed = [pi for m in pm.matches for pi in m.pred_ids]
            consumed += [ce.pred_id for ce in pm.class_errors]
            consumed += pm.false_positives
            assert sorted(consumed) == list(range(len(preds)))
            # class-error regions stay in the false-negative list
            fn_set = set(pm.false_negatives)
            assert all(ce.gt_id in fn_set for ce in pm.class_errors)


def _rand_box(rng):
    x = float(rng.uniform(0, 200))
    y = float(rng.uniform(0, 200))
    return (x, y, x + float(rng.uniform(5, 80)), y + float(rng.uniform(5, 80)))


class TestDualRoute:
    def test_greedy_matches_exhaustive_or_diverges(self):
        rng = np.random.default_rng(17)
        cfg = EvalConfig(allow_multibox=False)
        divergences = 0
        for _ in range(300):
            gts = [gt(i, _rand_box(rng)) for i in range(rng.integers(0, 5))]
            preds = [pred(_rand_box(rng)) for _ in range(rng.integers(0, 5))]
            pm = match_page(gts, preds, cfg)
            oracle = exhaustive_max_tp([(g.bbox, g.cls) for g in gts],
                                       [(p.bbox, p.cls) for p in preds],
                                       cfg.iou_threshold)
            if pm.divergence is not None:
                divergences += 1
                assert pm.divergence["optimal_tp"] == oracle
                assert pm.divergence["greedy_tp"] == len(pm.matches) < oracle
            else:
                assert len(pm.matches) == oracle

    def test_recorded_divergence_reaches_the_report(self):
        g0 = gt(0, (10, 0, 110, 10))
        g1 = gt(1, (0, 0, 100, 10))
        gt_pages = {"p": PageLabels("p", [g0, g1])}
        pred_pages = {"p": PredictionSet("p", "d", [pred((10, 0, 110, 10)),
                                                    pred((20, 0, 120, 10))])}
        report = evaluate(gt_pages, pred_pages, EvalConfig(allow_multibox=False))
        assert report.divergences == [{"page_id": "p", "greedy_tp": 1,
                                       "optimal_tp": 2, "n_gts": 2, "n_preds": 2}]
        assert report.to_json_dict()["divergences"] == report.divergences


class TestAggregateMetrics:
    def _report(self, pages):
        return aggregate(pages, EvalConfig())

    def test_perfect_run(self):
        gt_pages = {"p1": PageLabels("p1", [gt(0, (0, 0, 10, 10))])}
        pred_pages = {"p1": PredictionSet("p1", "d", [pred((0, 0, 10, 10))])}
        report = evaluate(gt_pages, pred_pages)
        assert (report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0)
        assert report.effort_percent == 0.0
        assert report.undefined == frozenset()
        assert report.summary_line() == "P=1.00 R=1.00 F1=1.00 effort=0%"

    def test_empty_everything_is_undefined(self):
        report = evaluate({"p": PageLabels("p", [])}, {})
        assert report.undefined == frozenset({"precision", "recall", "f1"})
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)

    def test_no_predictions_leaves_precision_undefined(self):
        report = evaluate({"p": PageLabels("p", [gt(0, (0, 0, 10, 10))])}, {})
        assert report.fn == 1
        assert "precision" in report.undefined
        assert report.recall == 0.0

    def test_missing_pred_page_counts_as_false_negatives(self):
        gt_pages = {"p1": PageLabels("p1", [gt(0, (0, 0, 10, 10))]),
                    "p2": PageLabels("p2", [gt(0, (0, 0, 10, 10))])}
        pred_pages = {"p1": PredictionSet("p1", "d", [pred((0, 0, 10, 10))])}
        report = evaluate(gt_pages, pred_pages)
        assert report.tp == 1 and report.fn == 1

    def test_unknown_pred_page_rejected(self):
        with pytest.raises(ValueError, match="unknown page_ids"):
            evaluate({"p1": PageLabels("p1", [])},
                     {"p9": PredictionSet("p9", "d", [])})

    def test_metrics_recomputes_from_pages(self):
        gt_pages = {"p1": PageLabels("p1", [gt(0, (0, 0, 10, 10)),
                                            gt(1, (50, 50, 60, 60))])}
        pred_pages = {"p1": PredictionSet("p1", "d", [pred((0, 0, 10, 10)),
                                                      pred((200, 200, 210, 210))])}
        report = evaluate(gt_pages, pred_pages)
        assert metrics(report) == (report.precision, report.recall, report.f1)

    def test_effort_components(self):
        # 8 TP, 2 FN (one from a class error), 1 FP, 1 class error:
        # default effort = 100*2/10 + 100*2/10 = 40; as a pure relabel
        # the class error costs nothing: 100*1/10 + 100*1/10 = 20
        gts = [gt(i, (i * 100, 0, i * 100 + 50, 50)) for i in range(10)]
        preds = [pred((i * 100, 0, i * 100 + 50, 50)) for i in range(8)]
        preds.append(pred((800, 0, 850, 50), cls=TAB))      # class error on g8
        preds.append(pred((5000, 0, 5050, 50)))             # stray FP
        report = evaluate({"p": PageLabels("p", gts)},
                          {"p": PredictionSet("p", "d", preds)})
        assert (report.tp, report.fp, report.fn, report.class_error_count) == (8, 1, 2, 1)
        assert report.effort_percent == 40.0
        assert effort_estimate(report, relabel_only=True) == 20.0

    def test_fine_tune_rate(self):
        g0 = gt(0, (0, 0, 100, 10))
        g1 = gt(1, (200, 0, 300, 10))
        p_exact = pred((0, 0, 100, 10))
        p_off = pred((210, 0, 310, 10))  # IoU 90/110 = 0.818...
        report = evaluate({"p": PageLabels("p", [g0, g1])},
                          {"p": PredictionSet("p", "d", [p_exact, p_off])})
        assert report.fine_tune_rate == 0.5
        assert fine_tune_rate(report, exact_tolerance=0.5) == 0.0

    def test_page_granularity_metrics(self):
        clean = ("p1", [gt(0, (0, 0, 10, 10))], [pred((0, 0, 10, 10))])
        dirty = ("p2", [gt(0, (0, 0, 10, 10))], [pred((500, 0, 510, 10))])
        pages = {}
        for pid, gts, preds in (clean, dirty):
            pages[pid] = match_page(gts, preds, EvalConfig())
        report = aggregate(pages, EvalConfig())
        assert report.effort_pages_percent == 50.0
        assert report.fine_tune_rate_pages == 0.0

    def test_json_round_trip(self, tmp_path):
        gt_pages = {"p1": PageLabels("p1", [gt(0, (0, 0, 10, 10))])}
        pred_pages = {"p1": PredictionSet("p1", "d", [pred((0, 0, 10, 10))])}
        report = evaluate(gt_pages, pred_pages)
        out = tmp_path / "report.json"
        report.write_json(out)
        loaded = json.loads(out.read_text())
        assert loaded["counts"] == {"tp": 1, "fp": 0, "fn": 0,
                                    "class_errors": 0, "pages": 1}
        assert loaded["metrics"]["precision"] == 1.0
        assert loaded["pages"]["p1"]["matches"][0]["gt_id"] == "g0000"
        compact = report.to_json_dict(include_pages=False)
        assert "pages" not in compact

    def test_summary_line_trims_integral_effort(self):
        gts = [gt(i, (i * 100, 0, i * 100 + 50, 50)) for i in range(4)]
        preds = [pred((i * 100, 0, i * 100 + 50, 50)) for i in range(3)]
        report = evaluate({"p": PageLabels("p", gts)},
                          {"p": PredictionSet("p", "d", preds)})
        # effort = 100*1/4 + 0 = 25.0 exactly
        assert report.summary_line() == "P=1.00 R=0.75 F1=0.86 effort=25%"
