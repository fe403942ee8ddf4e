import dataclasses
import statistics

import pytest

import variantsim as vs
from variantsim.model import ms
from variantsim.simulator import _scheduled_arrivals

from helpers import (
    face_config,
    face_detection_spec,
    single_variant_config,
    upscaling_config,
)


class TestGenerateArrivals:
    def test_mean_gap_matches_rate(self):
        times = vs.generate_arrivals(10.0, 100_000, seed=3)
        gaps = [b - a for a, b in zip([0] + times[:-1], times)]
        assert statistics.mean(gaps) == pytest.approx(100_000, rel=0.01)

    def test_single_arrival(self):
        times = vs.generate_arrivals(5.0, 1, seed=3)
        assert len(times) == 1 and times[0] > 0

    def test_deterministic_for_fixed_seed(self):
        assert vs.generate_arrivals(10.0, 1000, seed=9) == vs.generate_arrivals(10.0, 1000, seed=9)

    def test_strictly_increasing_even_at_high_rate(self):
        times = vs.generate_arrivals(5_000_000.0, 5000, seed=1)
        assert all(a < b for a, b in zip(times, times[1:]))

    def test_rejects_non_positive_rate(self):
        with pytest.raises(ValueError):
            vs.generate_arrivals(0.0, 10, seed=1)

    def test_schedule_shifts_the_rate(self):
        import numpy as np

        spec = vs.ArrivalSpec(
            rate=10.0,
            schedule=((0, 100.0), (1_000_000, 1.0)),
        )
        times = _scheduled_arrivals(spec, 300, np.random.default_rng(0))
        in_first_second = sum(1 for t in times if t <= 1_000_000)
        assert in_first_second == pytest.approx(100, abs=40)
        assert all(a < b for a, b in zip(times, times[1:]))


class TestSingleRequest:
    def test_sojourn_is_one_service_time(self):
        config = single_variant_config(ms(70), rate=1.0, requests=1, seed=5)
        trace = vs.run_scenario(config)
        assert len(trace.records) == 1
        record = trace.records[0]
        assert record.sojourn_us == ms(70)
        assert record.stages[0].queue_length_at_arrival == 0
        assert not trace.switches

    def test_stage_times_are_consistent(self):
        config = face_config(15.0, seed=2, requests=200)
        trace = vs.run_scenario(config)
        for record in trace.records:
            for stage in record.stages:
                assert stage.arrival_us <= stage.service_start_us <= stage.service_end_us


class TestSwitchingRun:
    def test_downward_switch_and_clean_tail(self):
        trace = vs.run_scenario(face_config(15.0, seed=13))
        assert len(trace.switches) == 1
        switch = trace.switches[0]
        assert switch.from_variant == "haar" and switch.to_variant == "lbp"
        assert switch.reason is vs.SwitchReason.THRESHOLD_EXCEEDED
        assert switch.applied_after_us == 17_000
        stats = vs.violation_stats(trace, ms(500))
        assert stats.post_switch_fraction == 0.0

    def test_in_flight_requests_finish_on_old_variant(self):
        trace = vs.run_scenario(face_config(15.0, seed=13))
        switch = trace.switches[0]
        for record in trace.records:
            stage = record.stages[0]
            if stage.service_start_us < switch.effective_us:
                assert stage.variant_id == switch.from_variant
            else:
                assert stage.variant_id == switch.to_variant

    def test_baseline_keeps_growing(self):
        trace = vs.run_scenario(face_config(17.0, seed=13, switching=False))
        by_arrival = trace.records_by_arrival()
        q20 = by_arrival[len(by_arrival) // 5].stages[0].queue_length_at_arrival
        q_final = trace.service_stats[0].queue_len_at_last_arrival
        assert q_final > q20
        assert vs.violation_stats(trace, ms(500)).count >= 1

    def test_upscaling_initial_selection_skips_gans_then_switches(self):
        trace = vs.run_scenario(upscaling_config(seed=1))
        assert trace.initial_variants["upscaling"] == "psnr-large"
        targets = [s.to_variant for s in trace.switches]
        assert "psnr-small" in targets

    def test_forced_selection_without_stability_check(self):
        trace = vs.run_scenario(
            face_config(17.0, seed=1, stability_check=False, initial_selection=True)
        )
        assert trace.initial_variants["face-detection"] == "haar"
        assert any(s.to_variant == "lbp" for s in trace.switches)

    def test_restart_mode_blocks_service_during_gap(self):
        control = vs.run_scenario(face_config(15.0, seed=13))
        restart = vs.run_scenario(
            face_config(15.0, seed=13, switch_mode="restart", switch_latency_us=ms(1800))
        )
        control_violations = vs.violation_stats(control, ms(500)).count
        restart_violations = vs.violation_stats(restart, ms(500)).count
        assert restart_violations > control_violations
        # no request may start service inside the restart gap
        switch = restart.switches[0]
        gap = (switch.time_us, switch.effective_us)
        for record in restart.records:
            start = record.stages[0].service_start_us
            assert not (gap[0] < start < gap[1])

    def test_recovery_switches_back_after_load_drop(self):
        spec = face_detection_spec()
        config = vs.ScenarioConfig(
            services=(spec,),
            arrivals=vs.ArrivalSpec(
                rate=15.0, schedule=((0, 15.0), (8_000_000, 5.0))
            ),
            constraint_us=ms(500),
            request_count=300,
            seed=21,
            policy=vs.PolicyOptions(
                initial_selection=False,
                recovery=vs.RecoveryOptions(stable_window=50, margin=0.5),
            ),
        )
        trace = vs.run_scenario(config)
        reasons = [s.reason for s in trace.switches]
        assert vs.SwitchReason.THRESHOLD_EXCEEDED in reasons
        assert vs.SwitchReason.RECOVERY in reasons
        recovery = next(s for s in trace.switches if s.reason is vs.SwitchReason.RECOVERY)
        assert recovery.from_variant == "lbp" and recovery.to_variant == "haar"


class TestChains:
    def chain_config(self, seed=4, requests=150):
        compression = vs.MicroserviceSpec(
            service_id="compression",
            dimensions=vs.AdaptationDimensions(),
            variants=(
                (vs.ServiceVariant("jpeg"), vs.VariantProfile("jpeg", ms(8), 0.9)),
            ),
            initial_variant="jpeg",
        )
        blur = vs.MicroserviceSpec(
            service_id="blurring",
            dimensions=vs.AdaptationDimensions(algorithms=("gaussian", "median")),
            variants=(
                (vs.ServiceVariant("gaussian", algorithm="gaussian"),
                 vs.VariantProfile("gaussian", ms(10), 0.8)),
                (vs.ServiceVariant("median", algorithm="median"),
                 vs.VariantProfile("median", ms(14), 0.9)),
            ),
            initial_variant="median",
        )
        chain = vs.ServiceChainSpec(
            chain_id="anonymization",
            stages=("compression", "face-detection", "blurring"),
        )
        return vs.ScenarioConfig(
            services=(compression, face_detection_spec(), blur),
            arrivals=vs.ArrivalSpec(rate=8.0),
            constraint_us=ms(900),
            request_count=requests,
            seed=seed,
            policy=vs.PolicyOptions(initial_selection=False),
            chains=(chain,),
        )

    def test_stage_handoff_is_immediate_and_ordered(self):
        trace = vs.run_scenario(self.chain_config())
        for record in trace.records:
            assert [s.service_id for s in record.stages] == [
                "compression", "face-detection", "blurring",
            ]
            for prev, nxt in zip(record.stages, record.stages[1:]):
                assert nxt.arrival_us == prev.service_end_us

    def test_chain_qor_is_product_of_stage_qors(self):
        trace = vs.run_scenario(self.chain_config())
        record = trace.records[0]
        expected = 1.0
        lookup = {s.service_id: s for s in self.chain_config().services}
        for stage in record.stages:
            expected *= lookup[stage.service_id].profile(stage.variant_id).qor
        assert record.qor == pytest.approx(expected)

    def test_sojourn_spans_whole_chain(self):
        trace = vs.run_scenario(self.chain_config())
        for record in trace.records:
            assert record.sojourn_us == (
                record.stages[-1].service_end_us - record.stages[0].arrival_us
            )


class TestEngineProperties:
    def test_fifo_per_service(self):
        trace = vs.run_scenario(face_config(15.0, seed=8, requests=400))
        starts = [
            (r.stages[0].arrival_us, r.stages[0].service_start_us)
            for r in trace.records_by_arrival()
        ]
        service_starts = [s for _, s in starts]
        assert service_starts == sorted(service_starts)

    def test_records_sorted_by_completion(self):
        trace = vs.run_scenario(face_config(15.0, seed=8, requests=400))
        ends = [r.stages[-1].service_end_us for r in trace.records]
        assert ends == sorted(ends)

    def test_conservation_at_every_arrival_instant(self):
        trace = vs.run_scenario(face_config(17.0, seed=3, requests=300))
        records = trace.records
        horizon = max(r.stages[0].arrival_us for r in records)
        injected = sum(1 for r in records if r.stages[0].arrival_us <= horizon)
        completed = sum(1 for r in records if r.stages[-1].service_end_us <= horizon)
        in_system = sum(
            1
            for r in records
            if r.stages[0].arrival_us <= horizon < r.stages[-1].service_end_us
        )
        assert injected == completed + in_system

    def test_littles_law_at_half_load(self):
        config = single_variant_config(ms(50), 10.0, requests=100_000, seed=17)
        trace = vs.run_scenario(config)
        time_avg_queue = trace.service_stats[0].time_avg_queue_len
        mean_queue_wait_s = statistics.mean(
            r.stages[0].service_start_us - r.stages[0].arrival_us for r in trace.records
        ) / 1e6
        assert time_avg_queue == pytest.approx(10.0 * mean_queue_wait_s, rel=0.10)

    def test_queue_samples_cover_both_streams(self):
        trace = vs.run_scenario(face_config(15.0, seed=2, requests=100))
        kinds = {s.event for s in trace.queue_samples}
        assert kinds == {"arrival", "completion"}


class TestReplay:
    def test_replay_check_holds(self):
        assert vs.replay_check(face_config(15.0, seed=13, requests=200))

    def test_replay_with_noise_holds(self):
        spec = face_detection_spec()
        noisy = dataclasses.replace(
            spec,
            variants=tuple(
                (v, dataclasses.replace(p, noise=vs.LognormalNoise(0.02)))
                for v, p in spec.variants
            ),
        )
        config = dataclasses.replace(face_config(15.0, seed=13, requests=200), services=(noisy,))
        assert vs.replay_check(config)

    def test_different_seeds_differ(self):
        a = vs.run_scenario(face_config(15.0, seed=1, requests=100))
        b = vs.run_scenario(face_config(15.0, seed=2, requests=100))
        assert a.records != b.records


class TestValidation:
    def test_unresolved_chain_reference(self):
        config = dataclasses.replace(
            face_config(15.0, seed=1),
            chains=(vs.ServiceChainSpec("c", stages=("missing",)),),
        )
        with pytest.raises(vs.ScenarioValidationError) as err:
            vs.run_scenario(config)
        assert "missing" in str(err.value)

    def test_zero_requests(self):
        config = dataclasses.replace(face_config(15.0, seed=1), request_count=0)
        report = vs.validate_scenario(config)
        assert any(issue.path == "request_count" for issue in report.issues)

    def test_schedule_must_end_active(self):
        config = dataclasses.replace(
            face_config(15.0, seed=1),
            arrivals=vs.ArrivalSpec(rate=15.0, schedule=((0, 15.0), (1_000_000, 0.0))),
        )
        report = vs.validate_scenario(config)
        assert any("final segment" in issue.message for issue in report.issues)
