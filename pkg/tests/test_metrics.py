import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from asymdiff.metrics import (
    ZERO_MSD_DB,
    MsdCurve,
    average_trials,
    complexity_table,
    format_complexity_table,
    network_msd,
    read_msd_csv,
    steady_state,
    to_db,
    write_complexity_csv,
    write_msd_csv,
)


class TestNetworkMsd:
    def test_zero_deviation(self):
        w0 = np.array([0.3, -0.7])
        assert network_msd(np.tile(w0, (4, 1)), w0) == 0.0

    def test_single_node_unit(self):
        assert network_msd(np.array([[1.0, 0.0]]), np.zeros(2)) == 1.0
        assert to_db(1.0) == 0.0

    def test_two_node_mean(self):
        est = np.array([[1.0, 0.0], [0.0, math.sqrt(3.0)]])
        assert network_msd(est, np.zeros(2)) == pytest.approx(2.0)

    def test_batched(self):
        rng = np.random.default_rng(0)
        est = rng.standard_normal((3, 5, 4))
        w0 = rng.standard_normal(4)
        batched = network_msd(est, w0)
        assert np.allclose(batched, [network_msd(e, w0) for e in est])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            network_msd(np.zeros((3, 4)), np.zeros(5))

    def test_sentinel(self):
        assert to_db(0.0) == ZERO_MSD_DB
        assert to_db(1e-301) == ZERO_MSD_DB
        assert to_db(1e-300) == pytest.approx(-3000.0)
        assert to_db(100.0) == 20.0


class TestAggregation:
    def test_linear_before_log(self):
        # averaging 0 dB and -20 dB in linear terms is 10log10(0.505), not -10 dB
        curve = average_trials([[1.0], [0.01]])
        assert to_db(curve)[0] == pytest.approx(10 * math.log10(0.505))

    def test_duplicate_trials(self):
        rng = np.random.default_rng(1)
        row = rng.random(50)
        assert np.array_equal(average_trials([row, row]), average_trials([row]))

    @settings(max_examples=100)
    @given(arrays(float, (4, 12), elements=st.floats(1e-6, 1e6)))
    def test_adding_mean_trial_is_neutral(self, rows):
        mean = average_trials(rows)
        extended = average_trials(np.vstack([rows, mean]))
        assert np.allclose(extended, mean, rtol=1e-12, atol=0)

    def test_trial_order_irrelevant(self):
        rng = np.random.default_rng(2)
        rows = rng.random((7, 30)) * 10.0 ** rng.integers(-8, 8, (7, 1))
        assert np.array_equal(average_trials(rows), average_trials(rows[::-1]))

    def test_empty(self):
        with pytest.raises(ValueError):
            average_trials(np.empty((0, 3)))

    def test_steady_state_window(self):
        x = np.arange(100.0)
        assert steady_state(x, 0.1) == pytest.approx(np.mean(x[-10:]))
        assert steady_state(np.array([4.0]), 0.1) == 4.0

    def test_curve_excludes_diverged(self):
        msd = np.array([[1.0, 0.1], [np.nan, np.nan], [1.0, 0.1]])
        curve = MsdCurve.from_trials("X", msd, [False, True, False], 1.0)
        assert curve.trials == 2
        assert curve.diverged_trials == 1
        assert np.allclose(curve.values_db, [0.0, -10.0])

    def test_all_diverged(self):
        with pytest.raises(RuntimeError):
            MsdCurve.from_trials("X", np.ones((2, 3)), [True, True], 1.0)


class TestCsv:
    def test_round_trip(self):
        a = MsdCurve("A", np.array([1.5, -3.25, 0.1]), 1, 0, 0.0)
        b = MsdCurve("B", np.array([2.0, 2.0, -7.0]), 1, 0, 0.0)
        buf = io.StringIO()
        write_msd_csv([a, b], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "iteration,algorithm,msd_db"
        assert lines[1:3] == ["0,A,1.5", "0,B,2.0"]
        back = read_msd_csv(io.StringIO(buf.getvalue()))
        assert list(back) == ["A", "B"]
        assert np.array_equal(back["A"][1], a.values_db)

    def test_no_rows(self):
        with pytest.raises(ValueError, match="no data rows"):
            read_msd_csv(io.StringIO("iteration,algorithm,msd_db\n"))

    def test_bad_header(self):
        with pytest.raises(ValueError):
            read_msd_csv(io.StringIO("a,b,c\n1,x,2\n"))


def _row(rows, algorithm, label):
    return next(r for r in rows if r.algorithm == algorithm and r.recursion_label == label)


class TestComplexity:
    def test_reference_values(self):
        rows = complexity_table(16, 20)
        lec = _row(rows, "DLECLMS", "adapt")
        assert (lec.multiplications, lec.additions, lec.exp_ops) == (756, 960, 20)
        comb = _row(rows, "DLECLMS", "combine")
        assert (comb.multiplications, comb.additions) == (320, 304)
        assert _row(rows, "DSELMS", "adapt").multiplications == 676
        assert _row(rows, "DLLAD", "adapt").multiplications == 656
        assert _row(rows, "DLLAD", "adapt").abs_ops == 20
        assert _row(rows, "DLLCLMS", "adapt (e>0)").multiplications == 696
        assert _row(rows, "DQQCLMS", "adapt (e<=0)").multiplications == 716

    def test_smallest_network(self):
        assert _row(complexity_table(1, 1), "DSELMS", "adapt").multiplications == 4

    def test_ordering(self):
        rows = complexity_table(16, 20)
        mults = [_row(rows, name, label).multiplications for name, label in [
            ("DSELMS", "adapt"), ("DLLCLMS", "adapt (e>0)"), ("DQQCLMS", "adapt (e>0)"), ("DLECLMS", "adapt")]]
        assert mults == sorted(mults) and len(set(mults)) == 4

    @settings(max_examples=50)
    @given(st.integers(1, 64), st.integers(1, 64))
    def test_counts_nonnegative(self, m, n):
        for r in complexity_table(m, n):
            assert min(r.multiplications, r.additions, r.sign_ops, r.exp_ops, r.abs_ops) >= 0

    def test_invalid(self):
        with pytest.raises(ValueError):
            complexity_table(0, 3)

    def test_rendering(self):
        rows = complexity_table(16, 20)
        text = format_complexity_table(rows)
        assert ">" in text  # lower-bound rows are marked
        assert "756" in text
        buf = io.StringIO()
        write_complexity_csv(rows, buf)
        assert len(buf.getvalue().splitlines()) == len(rows) + 1
