import numpy as np
import pytest

from trigdet import (
    GroundTruthWindow,
    TriggerConfig,
    TriggerResult,
    ValidationError,
    classify,
    detect_crossing,
    trigger_report,
)

from conftest import brute_force_crossing, points_series


class TestDetectCrossing:
    def test_fires_at_first_upward_crossing(self):
        series = points_series([0.005, 0.008, 0.02, 0.04])
        result = detect_crossing(series, TriggerConfig(tau=0.01))
        assert result.fired and result.fire_timestep == 2
        assert result.prev_value == 0.008
        assert result.cross_value == 0.02

    def test_starting_above_never_fires(self):
        series = points_series([0.5, 0.6, 0.7])
        result = detect_crossing(series, TriggerConfig(tau=0.01))
        assert not result.fired
        assert result.fire_timestep is None

    def test_confirmation_skips_unconfirmed_crossing(self):
        series = points_series([0.005, 0.02, 0.007, 0.03])
        result = detect_crossing(series, TriggerConfig(tau=0.01, confirm_steps=1))
        assert result.fire_timestep == 3

    def test_exactly_at_threshold_counts(self):
        series = points_series([0.005, 0.01])
        assert detect_crossing(series, TriggerConfig(tau=0.01)).fire_timestep == 1

    def test_gaps_are_skipped(self):
        series = points_series([0.005, None, None, 0.02])
        assert detect_crossing(series, TriggerConfig(tau=0.01)).fire_timestep == 3

    def test_gap_inside_confirmation(self):
        series = points_series([0.005, 0.02, None, 0.03, 0.04])
        result = detect_crossing(series, TriggerConfig(tau=0.01, confirm_steps=2))
        assert result.fire_timestep == 1

    def test_from_above_mirror(self):
        series = points_series([0.9, 0.5, 0.05, 0.01])
        result = detect_crossing(series, TriggerConfig(tau=0.1, direction="from_above"))
        assert result.fire_timestep == 2

    def test_needs_two_defined_points(self):
        with pytest.raises(ValidationError):
            detect_crossing(points_series([0.5, None, None]), TriggerConfig(tau=0.1))

    def test_randomized_against_oracle(self):
        rng = np.random.default_rng(31)
        for trial in range(200):
            n = int(rng.integers(2, 40))
            values = list(rng.uniform(0.0, 0.1, size=n))
            for i in range(n):
                if rng.random() < 0.15:
                    values[i] = None
            if sum(v is not None for v in values) < 2:
                continue
            series = points_series(values)
            tau = float(rng.uniform(0.0, 0.1))
            direction = "from_below" if rng.random() < 0.5 else "from_above"
            confirm = int(rng.integers(0, 4))
            config = TriggerConfig(tau=tau, direction=direction, confirm_steps=confirm)
            got = detect_crossing(series, config).fire_timestep
            want = brute_force_crossing(series.points, tau, direction, confirm)
            assert got == want, f"trial {trial}: {values} tau={tau} {direction} m={confirm}"

    def test_monotone_series_fire_time_monotone_in_tau(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            values = np.concatenate([[0.0], np.cumsum(rng.uniform(0, 0.01, size=50))])
            series = points_series(list(values))
            taus = np.linspace(0.005, values.max() * 0.95, 20)
            fires = [detect_crossing(series, TriggerConfig(tau=t)).fire_timestep for t in taus]
            fired = [f for f in fires if f is not None]
            assert all(a <= b for a, b in zip(fired, fired[1:]))


class TestClassify:
    window = GroundTruthWindow(t_lo=250, t_hi=315)

    def fire_at(self, t):
        return TriggerResult(fired=True, fire_timestep=t, prev_value=0.0, cross_value=1.0,
                             config=TriggerConfig(tau=0.5))

    def test_in_window(self):
        assert classify(self.fire_at(255), self.window) == "in_window"

    def test_early_is_viable(self):
        assert classify(self.fire_at(235), self.window) == "early"

    def test_late(self):
        assert classify(self.fire_at(400), self.window) == "late"

    def test_no_fire_is_none(self):
        result = TriggerResult(fired=False, fire_timestep=None, prev_value=None,
                               cross_value=None, config=TriggerConfig(tau=0.5))
        assert classify(result, self.window) == "none"

    def test_window_bounds_inclusive(self):
        assert classify(self.fire_at(250), self.window) == "in_window"
        assert classify(self.fire_at(315), self.window) == "in_window"


def test_window_validation():
    with pytest.raises(ValidationError):
        GroundTruthWindow(t_lo=5, t_hi=4)


def test_result_consistency_enforced():
    with pytest.raises(ValidationError):
        TriggerResult(fired=True, fire_timestep=None, prev_value=None, cross_value=None,
                      config=TriggerConfig(tau=0.5))


def test_config_validation():
    with pytest.raises(ValidationError):
        TriggerConfig(tau=float("nan"))
    with pytest.raises(ValidationError):
        TriggerConfig(tau=0.5, direction="sideways")
    with pytest.raises(ValidationError):
        TriggerConfig(tau=0.5, confirm_steps=-1)


def test_report_payload_schema():
    result = TriggerResult(fired=True, fire_timestep=9, prev_value=0.1, cross_value=0.3,
                           config=TriggerConfig(tau=0.2, confirm_steps=1))
    payload = trigger_report(result, classification="in_window")
    assert payload == {
        "fired": True,
        "fire_timestep": 9,
        "tau": 0.2,
        "direction": "from_below",
        "confirm_steps": 1,
        "classification": "in_window",
    }
    assert "classification" not in trigger_report(result)
