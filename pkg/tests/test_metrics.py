import numpy as np
import pytest

from heatcall.metrics import MetricsReport, arv, mae, mape, mse, pocid, render_report_csv, report_all


class TestMae:
    def test_identical(self):
        assert mae([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_hand_value(self):
        assert mae([0.0, 0.0], [1.0, 3.0]) == 2.0

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        y, y_hat = rng.normal(size=20), rng.normal(size=20)
        perm = rng.permutation(20)
        assert mae(y, y_hat) == pytest.approx(mae(y[perm], y_hat[perm]), rel=1e-14)

    def test_symmetric(self):
        assert mae([1.0, 4.0], [2.0, 2.0]) == mae([2.0, 2.0], [1.0, 4.0])


class TestMse:
    def test_identical(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_value(self):
        assert mse([0.0, 0.0], [1.0, 3.0]) == 5.0

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            y = rng.normal(size=6)
            y_hat = y.copy()
            assert mse(y, y_hat) == 0.0
            y_hat[3] += 1e-3
            assert mse(y, y_hat) > 0.0

    def test_symmetric(self):
        assert mse([1.0, 4.0], [2.0, 2.0]) == mse([2.0, 2.0], [1.0, 4.0])


class TestMape:
    def test_identical(self):
        assert mape([2.0, 4.0], [2.0, 4.0]) == 0.0

    def test_hand_value_is_fraction(self):
        assert mape([2.0, 4.0], [1.0, 2.0]) == 0.5

    def test_zero_actual_names_index(self):
        with pytest.raises(ValueError, match="index 1"):
            mape([2.0, 0.0, 4.0], [1.0, 1.0, 1.0])

    def test_asymmetric_witness(self):
        assert mape([2.0, 4.0], [1.0, 2.0]) != mape([1.0, 2.0], [2.0, 4.0])


class TestPocid:
    def test_perfect_tracking(self):
        y = [1.0, 2.0, 1.5, 3.0]
        assert pocid(y, y) == 100.0

    def test_opposite_directions(self):
        y = [1.0, 2.0, 3.0, 4.0]
        assert pocid(y, [-v for v in y]) == 0.0

    def test_hand_enumeration(self):
        # directions +,-,+ against +,+,+: hits at the first and third steps
        assert pocid([1.0, 2.0, 1.0, 2.0], [0.0, 1.0, 2.0, 3.0]) == pytest.approx(200.0 / 3.0)

    def test_ties_count_as_misses(self):
        assert pocid([1.0, 2.0, 3.0], [5.0, 5.0, 6.0]) == 50.0

    def test_range(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            value = pocid(rng.normal(size=10), rng.normal(size=10))
            assert 0.0 <= value <= 100.0

    def test_order_dependence_witness(self):
        y = np.array([1.0, 2.0, 3.0, 1.0])
        y_hat = np.array([1.0, 2.0, 2.5, 0.5])
        perm = np.array([2, 0, 3, 1])
        assert pocid(y, y_hat) != pocid(y[perm], y_hat[perm])

    def test_too_short(self):
        with pytest.raises(ValueError):
            pocid([1.0], [1.0])


class TestArv:
    def test_identical_non_constant(self):
        assert arv([1.0, 3.0], [1.0, 3.0]) == 0.0

    def test_constant_prediction_at_mean_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            arv([1.0, 3.0], [2.0, 2.0])

    def test_hand_value(self):
        assert arv([1.0, 3.0], [2.0, 4.0]) == pytest.approx(0.25, rel=1e-14)

    def test_actual_denominator_variant(self):
        # numerator 2, actual spread (1-2)^2 + (3-2)^2 = 2, n = 2
        assert arv([1.0, 3.0], [2.0, 4.0], denominator="actual") == pytest.approx(0.5, rel=1e-14)

    def test_bad_denominator_name(self):
        with pytest.raises(ValueError):
            arv([1.0, 3.0], [2.0, 4.0], denominator="other")

    def test_non_negative(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            assert arv(rng.normal(size=8), rng.normal(size=8)) >= 0.0

    def test_asymmetric_witness(self):
        assert arv([1.0, 3.0], [2.0, 6.0]) != arv([2.0, 6.0], [1.0, 3.0])


class TestReportAll:
    def test_identical_non_constant_series(self):
        report = report_all([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert report == MetricsReport(mae=0.0, mse=0.0, mape=0.0, pocid=100.0, arv=0.0, n=3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            report_all([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_hand_values(self):
        report = report_all([2.0, 4.0], [1.0, 2.0])
        assert report.mae == 1.5
        assert report.mse == 2.5
        assert report.mape == 0.5
        assert report.pocid == 100.0
        # mean(actual) = 3; predicted spread (1-3)^2 + (2-3)^2 = 5; errors 1 + 4 = 5
        assert report.arv == pytest.approx(0.5, rel=1e-14)
        assert report.n == 2

    def test_guarded_fields_become_none(self):
        report = report_all([0.0, 1.0], [0.5, 0.6])
        assert report.mape is None
        assert report.arv is not None
        report = report_all([1.0, 3.0], [2.0, 2.0])
        assert report.arv is None
        assert report.mape is not None

    def test_renderer_marks_unavailable(self):
        report = report_all([0.0, 1.0], [0.5, 0.5])
        text = render_report_csv("PETRA332", 24.76, report)
        header, row = text.strip().split("\n")
        assert header == "code,strike,mae,mse,mape,pocid,arv,n"
        assert row.split(",")[4] == "NA"


class TestBruteForceAgreement:
    def test_thousand_random_pairs(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            n = int(rng.integers(2, 12))
            y = rng.uniform(0.5, 10, n)
            y_hat = rng.uniform(0.5, 10, n)

            bf_mae = sum(abs(a - b) for a, b in zip(y, y_hat)) / n
            bf_mse = sum((a - b) ** 2 for a, b in zip(y, y_hat)) / n
            bf_mape = sum(abs((a - b) / a) for a, b in zip(y, y_hat)) / n
            hits = sum(
                1 for i in range(1, n) if (y[i] - y[i - 1]) * (y_hat[i] - y_hat[i - 1]) > 0
            )
            bf_pocid = 100.0 * hits / (n - 1)
            y_bar = sum(y) / n
            bf_arv = (sum((b - a) ** 2 for a, b in zip(y, y_hat)) / sum((b - y_bar) ** 2 for b in y_hat)) / n

            assert mae(y, y_hat) == pytest.approx(bf_mae, abs=1e-12)
            assert mse(y, y_hat) == pytest.approx(bf_mse, abs=1e-12)
            assert mape(y, y_hat) == pytest.approx(bf_mape, abs=1e-12)
            assert pocid(y, y_hat) == pytest.approx(bf_pocid, abs=1e-12)
            assert arv(y, y_hat) == pytest.approx(bf_arv, abs=1e-12)
