import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from paco.exceptions import ConstraintError, WeightEstimationError
from paco.inpaint import (InpaintConfig, LaplacianWeights, PacoDctInpainter, dct_cost, estimate_weights, initial_fill,
                          inpaint, inpaint_partial, one_shot, restore, soft_threshold, weighted_l1)
from paco.masks import gaps
from paco.metrics import psnr, rmse
from paco.ndsignal import Mask, Signal
from paco.patch_grid import build_grid, extract, project_consensus_omega, stitch_values
from paco.transforms import OrthoDct


def band_limited_image(size=64, peak=255.0):
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    x = (128 + 40 * np.cos(2 * np.pi * 2 * i / size)
         + 30 * np.cos(2 * np.pi * 3 * j / size + 0.5)
         + 20 * np.cos(2 * np.pi * (i + j) / size))
    return Signal(x, peak)


def square_hole(size=64, at=28, width=8):
    missing = np.zeros((size, size), dtype=bool)
    missing[at:at + width, at:at + width] = True
    return Mask.from_missing(missing)


class TestWeights(SimpleTestCase):
    def test_constant_signal(self):
        """Test that a constant signal gives AC weights of 1/ε"""
        signal = Signal(np.full((8, 8), 100.0), 255)
        grid = build_grid((8, 8), (4, 4), (2, 2))
        weights = estimate_weights(grid, OrthoDct((4, 4)), signal, Mask.all_known((8, 8)))
        eps = 1e-3 * 255 / np.sqrt(16)
        self.assertEqual(weights.epsilon, eps)
        assert_allclose(weights.w[1:], 1 / eps, rtol=1e-9)
        assert_allclose(weights.w[0], 1 / (400 + eps), rtol=1e-12)

    def test_mean_over_complete_patches(self):
        """Test b₁ = 3 from |a₁| = 2 and 4"""
        r = np.sqrt(2)
        signal = Signal([0.0, 2 * r, 0.0, 4 * r], 1.0)
        grid = build_grid((4,), (2,), (2,))
        weights = estimate_weights(grid, OrthoDct((2,)), signal, Mask.all_known((4,)))
        eps = 1e-3 / np.sqrt(2)
        self.assertAlmostEqual(weights.w[1], 1 / (3 + eps), places=12)

    def test_missing_patches_are_ignored(self):
        """Test that only complete patches enter the estimate"""
        r = np.sqrt(2)
        signal = Signal([0.0, 2 * r, 0.0, 400.0], 1.0)
        grid = build_grid((4,), (2,), (2,))
        mask = Mask([True, True, True, False])
        weights = estimate_weights(grid, OrthoDct((2,)), signal, mask)
        self.assertAlmostEqual(weights.w[1], 1 / (2 + 1e-3 / np.sqrt(2)), places=12)

    def test_every_patch_incomplete(self):
        """Test that weights cannot be estimated when every patch has a gap"""
        grid = build_grid((4,), (2,), (2,))
        with self.assertRaises(WeightEstimationError):
            estimate_weights(grid, OrthoDct((2,)), Signal(np.zeros(4), 1.0), Mask([True, False, False, True]))

    def test_invalid_weights(self):
        """Test that negative or non-finite weights are rejected"""
        with self.assertRaises(WeightEstimationError):
            LaplacianWeights(np.array([1.0, -1.0]), 0.1)
        with self.assertRaises(WeightEstimationError):
            LaplacianWeights(np.array([1.0, np.inf]), 0.1)


class TestSoftThreshold(SimpleTestCase):
    def test_scalar_examples(self):
        """Test 5 → 3, −5 → −3 and 1 → 0 with threshold 2"""
        A = np.array([[5.0, -5.0, 1.0]])
        assert_array_equal(soft_threshold(A, np.array([2.0]), 1.0), [[3.0, -3.0, 0.0]])

    def test_zero_threshold_is_identity(self):
        """Test that λw = 0 leaves the coefficients alone"""
        A = np.random.default_rng(0).standard_normal((3, 4))
        assert_array_equal(soft_threshold(A, np.zeros(3), 5.0), A)
        assert_array_equal(soft_threshold(A, np.array([0.0, 1.0, 1.0]), 5.0)[0], A[0])

    def test_matches_grid_search(self):
        """Test against minimizing w|x| + (x − a)²/2λ over a fine grid"""
        rng = np.random.default_rng(1)
        step = 1e-4
        for _ in range(1000):
            a = rng.uniform(-3, 3)
            w = rng.uniform(0, 2)
            lam = rng.uniform(0.05, 2)
            x = np.arange(min(a, 0.0) - step, max(a, 0.0) + step, step)
            best = x[np.argmin(w * np.abs(x) + (x - a) ** 2 / (2 * lam))]
            got = soft_threshold(np.array([[a]]), np.array([w]), lam)[0, 0]
            self.assertLessEqual(abs(got - best), step)

    def test_weighted_l1(self):
        """Test the cost of a coefficient matrix"""
        A = np.array([[1.0, -2.0], [3.0, 0.0]])
        self.assertEqual(weighted_l1(A, np.array([1.0, 0.5])), 4.5)


class TestInpaint(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.signal = band_limited_image()
        cls.mask = square_hole()
        cls.config = InpaintConfig.image(patch_shape=(16, 16), strides=(2, 2), max_iter=256)
        cls.restored, cls.trace = inpaint_partial(cls.signal, cls.mask, cls.config)

    def hole_rmse(self, restored):
        missing = self.mask.missing
        return rmse(self.signal.samples[missing], restored.samples[missing])

    def test_config_defaults(self):
        """Test the experiment presets"""
        self.assertEqual(InpaintConfig.image().patch_shape, (16, 16))
        self.assertEqual(InpaintConfig.image().max_iter, 256)
        audio = InpaintConfig.audio()
        self.assertEqual(audio.strides, (3968,))
        self.assertEqual(audio.max_iter, 1024)
        video = InpaintConfig.video()
        self.assertEqual((video.patch_shape, video.strides), ((4, 8, 8), (1, 2, 2)))
        self.assertEqual((video.kappa, video.shrink, video.tol), (10.0, 0.5, 1e-8))

    def test_restores_band_limited_image(self):
        """Test that the 8x8 hole is filled to an RMSE below 8"""
        self.assertLess(self.hole_rmse(self.restored), 8.0)
        self.assertLessEqual(len(self.trace), 256)

    def test_known_samples_are_exact(self):
        """Test that observed samples come back unchanged"""
        known = self.mask.known
        assert_array_equal(self.restored.samples[known], self.signal.samples[known])

    def test_consensus_beats_one_shot(self):
        """Test that the consensus solution improves on the single averaging step"""
        first = one_shot(self.signal, self.mask, self.config)
        grid = build_grid(self.signal.shape, (16, 16), (2, 2))
        transform = OrthoDct((16, 16))
        weights = estimate_weights(grid, transform, self.signal, self.mask)
        self.assertLessEqual(dct_cost(self.restored, grid, transform, weights),
                             dct_cost(first, grid, transform, weights))
        self.assertLessEqual(self.hole_rmse(self.restored), 0.8 * self.hole_rmse(first))

    def test_one_shot_is_threshold_then_average(self):
        """Test the first iterate against a direct threshold-and-average computation"""
        grid = build_grid(self.signal.shape, (16, 16), (2, 2))
        transform = OrthoDct((16, 16))
        weights = estimate_weights(grid, transform, self.signal, self.mask)
        start = initial_fill(self.signal, self.mask)
        A = soft_threshold(transform.forward(extract(grid, start)), weights, 10 * 255.0)
        expected = stitch_values(grid, transform.inverse(A))
        expected[self.mask.known] = self.signal.samples[self.mask.known]
        first = one_shot(self.signal, self.mask, self.config)
        assert_allclose(first.samples, expected, atol=1e-9)

    def test_partial_matches_full(self):
        """Test that partial updates give the same output and trace as full updates"""
        config = InpaintConfig.image(max_iter=40)
        full, full_trace = inpaint(self.signal, self.mask, config)
        partial, partial_trace = inpaint_partial(self.signal, self.mask, config)
        assert_allclose(partial.samples, full.samples, rtol=0, atol=1e-12)
        self.assertEqual([r.lam for r in full_trace.records], [r.lam for r in partial_trace.records])
        self.assertEqual(len(full_trace), len(partial_trace))

    def test_trace_cost_matches_coefficients(self):
        """Test that the traced cost is the weighted ℓ1 norm of the final coefficients in both modes"""
        for partial in (True, False):
            with self.subTest(partial=partial):
                runner = PacoDctInpainter(self.signal, self.mask, InpaintConfig.image(max_iter=5))
                _, trace = runner.run(partial=partial)
                self.assertEqual(trace.last.cost, weighted_l1(runner.A, runner.weights))
                self.assertEqual(runner.A.shape[1], runner.active.size)
                self.assertEqual(runner.Z.shape, runner.A.shape)

    def test_worker_count_gives_identical_output(self):
        """Test that 1, 2 and 8 transform workers restore bit-identical samples"""
        outputs = []
        for workers in (1, 2, 8):
            restored, trace = inpaint(self.signal, self.mask, InpaintConfig.image(max_iter=20, workers=workers))
            outputs.append((restored.samples, [r.cost for r in trace.records]))
        for samples, costs in outputs[1:]:
            assert_array_equal(samples, outputs[0][0])
            self.assertEqual(costs, outputs[0][1])

    def test_coefficient_projection_identity(self):
        """Test that Dᵀ R(x̂) equals transforming the Ω projection of the patch estimates"""
        grid = build_grid((24, 24), (8, 8), (2, 2))
        transform = OrthoDct((8, 8))
        signal = band_limited_image(24)
        mask = square_hole(24, 8, 4)
        Y_hat = np.random.default_rng(2).standard_normal((grid.m, grid.n)) * 50 + 128
        x_hat = stitch_values(grid, Y_hat)
        x_hat[mask.known] = signal.samples[mask.known]
        direct = transform.forward(extract(grid, x_hat))
        projected = transform.forward(project_consensus_omega(grid, Y_hat, mask, signal))
        assert_allclose(direct, projected, rtol=0, atol=1e-12 * np.abs(direct).max())

    def test_clip_keeps_range(self):
        """Test that clipping bounds every restored sample"""
        signal = Signal(np.clip(band_limited_image(32).samples, 0, 150), 255)
        config = InpaintConfig.image(patch_shape=(8, 8), max_iter=30, clip=(0.0, 150.0))
        restored, _ = inpaint(signal, square_hole(32, 12, 6), config)
        self.assertGreaterEqual(restored.samples.min(), 0.0)
        self.assertLessEqual(restored.samples.max(), 150.0)

    def test_clip_rejects_known_out_of_range(self):
        """Test that known samples must lie in the clip range"""
        config = InpaintConfig.image(patch_shape=(8, 8), clip=(0.0, 100.0))
        with self.assertRaises(ConstraintError):
            inpaint(band_limited_image(32), square_hole(32, 12, 6), config)

    def test_empty_erasure(self):
        """Test that nothing missing means the input comes straight back"""
        signal = band_limited_image(32)
        config = InpaintConfig.image(patch_shape=(8, 8))
        restored, trace = inpaint(signal, Mask.all_known(signal.shape), config)
        assert_array_equal(restored.samples, signal.samples)
        self.assertEqual(len(trace), 1)
        restored, trace = inpaint_partial(signal, Mask.all_known(signal.shape), config)
        self.assertIs(restored, signal)
        self.assertEqual(len(trace), 0)

    def test_full_erasure_fails(self):
        """Test that a fully erased signal cannot be inpainted"""
        signal = band_limited_image(32)
        with self.assertRaises(WeightEstimationError):
            inpaint(signal, Mask.from_missing(np.ones(signal.shape, dtype=bool)), InpaintConfig.image())

    def test_monitor_metrics_in_trace(self):
        """Test that a monitor adds metric columns to every trace row"""
        config = InpaintConfig.image(patch_shape=(8, 8), max_iter=4, tol=1e-300)
        signal = band_limited_image(32)
        _, trace = restore(signal, square_hole(32, 12, 6), config,
                           monitor=lambda x_hat: {"rmse": rmse(signal.samples, x_hat)})
        self.assertEqual(len(trace), 4)
        self.assertTrue(all("rmse" in r.metrics for r in trace.records))


class TestAudioInpaint(SimpleTestCase):
    def test_harmonic_signal(self):
        """Test 30 s of a three-partial tone with Poisson-placed gaps"""
        rate = 11025
        t = np.arange(30 * rate) / rate
        x = (8000 * np.sin(2 * np.pi * 220 * t) + 4000 * np.sin(2 * np.pi * 440 * t + 0.3)
             + 2000 * np.sin(2 * np.pi * 660 * t + 1.1))
        signal = Signal(x, 32768, rate)
        mask = gaps(signal.shape, seed=2024)
        erased = signal.with_samples(np.where(mask.known, x, 0.0))
        restored, trace = inpaint_partial(erased, mask, InpaintConfig.audio())
        assert_array_equal(restored.samples[mask.known], x[mask.known])
        error = rmse(x, restored.samples)
        self.assertLessEqual(error, 0.5 * rmse(x, erased.samples))
        self.assertGreaterEqual(psnr(error, 32768), 30.0)
