"""Two-pass turnstile streaming: equivalence with the in-memory estimator."""

import tracemalloc

import numpy as np
import pytest

from sketchridge.ridge import RidgeProblem, one_shot_solution
from sketchridge.sketches import SketchSpec, sketch_new
from sketchridge.streaming import (
    StreamState,
    TurnstileUpdate,
    read_updates,
    stream_finalize_pass1,
    stream_ingest,
    stream_pass2_accumulate,
    stream_solve,
)


def dense_updates(a):
    updates = []
    n, d = a.shape
    for i in range(n):
        for j in range(d):
            if a[i, j] != 0.0:
                updates.append(TurnstileUpdate(i, j, float(a[i, j])))
    return updates


SPEC = SketchSpec("osnap", m=12, d=30, s=3, seed=17)


class TestIngest:
    def test_zero_delta_leaves_state_unchanged(self):
        state = StreamState(SPEC, n=5)
        before = state.acc.copy()
        stream_ingest(state, TurnstileUpdate(2, 7, 0.0))
        np.testing.assert_array_equal(state.acc, before)
        assert state.update_count == 1

    def test_update_order_does_not_matter(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 30))
        updates = dense_updates(a)
        s1 = StreamState(SPEC, n=6)
        s2 = StreamState(SPEC, n=6)
        for u in updates:
            stream_ingest(s1, u)
        for u in reversed(updates):
            stream_ingest(s2, u)
        np.testing.assert_allclose(s1.acc, s2.acc, rtol=1e-12, atol=1e-14)

    def test_replay_matches_in_memory_sketch(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((10, 30))
        state = StreamState(SPEC, n=10)
        for u in dense_updates(a):
            stream_ingest(state, u)
        sk = sketch_new(SPEC)
        want = sk.apply(np.ascontiguousarray(a.T))
        np.testing.assert_allclose(state.acc, want, rtol=1e-12, atol=1e-14)

    def test_out_of_range_update_reports_position(self):
        state = StreamState(SPEC, n=5)
        stream_ingest(state, TurnstileUpdate(0, 0, 1.0))
        with pytest.raises(IndexError, match="update 1"):
            stream_ingest(state, TurnstileUpdate(5, 0, 1.0))
        with pytest.raises(IndexError):
            stream_ingest(state, TurnstileUpdate(0, 30, 1.0))

    def test_rejects_gaussian_spec(self):
        with pytest.raises(ValueError, match="sparse"):
            StreamState(SketchSpec("gaussian", m=8, d=30), n=4)


class TestFinalize:
    def test_empty_stream_returns_scaled_rhs(self):
        state = StreamState(SPEC, n=4)
        b = np.array([2.0, -4.0, 0.0, 6.0])
        y = stream_finalize_pass1(state, b, lam=2.0)
        np.testing.assert_allclose(y, b / 2.0, rtol=1e-14)

    def test_matches_in_memory_inner_solve(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((8, 30))
        b = rng.standard_normal(8)
        lam = 1.5
        state = StreamState(SPEC, n=8)
        for u in dense_updates(a):
            stream_ingest(state, u)
        y = stream_finalize_pass1(state, b, lam)
        sk = sketch_new(SPEC)
        z = sk.apply(np.ascontiguousarray(a.T))
        from sketchridge.linalg import spd_solve

        want = spd_solve(z.T @ z + lam * np.eye(8), b)
        np.testing.assert_allclose(y, want, rtol=1e-10)

    def test_huge_lambda_dominates(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((6, 30))
        b = rng.standard_normal(6)
        state = StreamState(SPEC, n=6)
        for u in dense_updates(a):
            stream_ingest(state, u)
        lam = 1e9 * np.linalg.norm(state.acc) ** 2
        y = stream_finalize_pass1(state, b, lam)
        np.testing.assert_allclose(y, b / lam, rtol=1e-6)

    def test_validates_inputs(self):
        state = StreamState(SPEC, n=4)
        with pytest.raises(ValueError):
            stream_finalize_pass1(state, np.zeros(5), 1.0)
        with pytest.raises(ValueError):
            stream_finalize_pass1(state, np.zeros(4), 0.0)


class TestPassTwo:
    def test_zero_y_accumulates_nothing(self):
        x = np.zeros(30)
        stream_pass2_accumulate(x, TurnstileUpdate(1, 3, 5.0), np.zeros(6))
        np.testing.assert_array_equal(x, np.zeros(30))

    def test_duplicate_updates_sum_linearly(self):
        y = np.array([1.0, 2.0])
        x1 = np.zeros(4)
        stream_pass2_accumulate(x1, TurnstileUpdate(1, 2, 0.5), y)
        stream_pass2_accumulate(x1, TurnstileUpdate(1, 2, 0.25), y)
        x2 = np.zeros(4)
        stream_pass2_accumulate(x2, TurnstileUpdate(1, 2, 0.75), y)
        np.testing.assert_allclose(x1, x2, atol=1e-15)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            stream_pass2_accumulate(np.zeros(4), TurnstileUpdate(0, 4, 1.0),
                                    np.zeros(2))


class TestEndToEnd:
    @pytest.mark.parametrize("seed", range(5))
    def test_two_pass_equals_one_shot(self, seed, tmp_path):
        rng = np.random.default_rng(seed)
        n, d = 8, 25
        a = rng.standard_normal((n, d))
        b = rng.standard_normal(n)
        lam = 2.0
        spec = SketchSpec("osnap", m=16, d=d, s=2, seed=seed)
        lines = ["# turnstile updates"]
        for i in range(n):
            for j in range(d):
                lines.append("%d %d %.17g" % (i, j, a[i, j]))
        path = tmp_path / "updates.txt"
        path.write_text("\n".join(lines) + "\n")
        x_stream = stream_solve(path, b, lam, spec)
        problem = RidgeProblem(a, b, lam)
        x_mem = one_shot_solution(problem, sketch_new(spec))
        rel = np.linalg.norm(x_stream - x_mem) / np.linalg.norm(x_mem)
        assert rel <= 1e-9

    def test_negative_and_duplicate_updates(self, tmp_path):
        rng = np.random.default_rng(99)
        n, d = 5, 12
        spec = SketchSpec("osnap", m=10, d=d, s=2, seed=5)
        raw = []
        a = np.zeros((n, d))
        for _ in range(300):
            i = int(rng.integers(n))
            j = int(rng.integers(d))
            v = float(rng.standard_normal())
            raw.append((i, j, v))
            a[i, j] += v
        path = tmp_path / "u.txt"
        path.write_text("\n".join("%d %d %.17g" % r for r in raw) + "\n")
        b = rng.standard_normal(n)
        x_stream = stream_solve(path, b, 1.0, spec)
        x_mem = one_shot_solution(RidgeProblem(a, b, 1.0), sketch_new(spec))
        assert np.linalg.norm(x_stream - x_mem) <= 1e-9 * np.linalg.norm(x_mem)

    def test_deterministic_across_runs(self, tmp_path):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((4, 10))
        spec = SketchSpec("countsketch", m=8, d=10, s=1, seed=3)
        path = tmp_path / "u.txt"
        path.write_text(
            "\n".join("%d %d %.17g" % (i, j, a[i, j])
                      for i in range(4) for j in range(10)) + "\n"
        )
        b = rng.standard_normal(4)
        x1 = stream_solve(path, b, 1.0, spec)
        x2 = stream_solve(path, b, 1.0, spec)
        np.testing.assert_array_equal(x1, x2)


class TestUpdateFile:
    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "u.txt"
        path.write_text("# header\n\n0 1 2.5\n   \n1 0 -1e-3\n")
        updates = list(read_updates(path))
        assert updates == [TurnstileUpdate(0, 1, 2.5), TurnstileUpdate(1, 0, -1e-3)]

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "u.txt"
        path.write_text("0 1 2.5\n0 nope 1\n")
        with pytest.raises(ValueError, match=":2:"):
            list(read_updates(path))

    def test_wrong_field_count_reports_line_number(self, tmp_path):
        path = tmp_path / "u.txt"
        path.write_text("0 1\n")
        with pytest.raises(ValueError, match=":1:"):
            list(read_updates(path))


class TestMemory:
    def test_state_is_independent_of_dimension(self):
        """State memory tracks m*n; a million columns must not be allocated."""
        spec = SketchSpec("osnap", m=8, d=1_000_000, s=4, seed=1)
        tracemalloc.start()
        state = StreamState(spec, n=4)
        for k in range(50):
            stream_ingest(state, TurnstileUpdate(k % 4, (k * 9973) % spec.d, 1.0))
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert peak < 256 * 1024
        assert 8 * spec.d * spec.s > 256 * 1024  # materializing would trip it
