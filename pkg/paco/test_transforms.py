import shutil
import struct
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from paco.exceptions import DictionaryError, ShapeMismatchError
from paco.testing import dct_matrix, dense_dct
from paco.transforms import (NORM_SAFETY, Dictionary, OrthoDct, dct_forward, dct_inverse, dict_adjoint, dict_apply,
                             load_dictionary, save_dictionary, spectral_norm)

PATCH_SHAPES = [(8,), (4, 4), (16, 16), (4, 8, 8), (3, 5)]


class TestOrthoDct(SimpleTestCase):
    def test_orthonormal(self):
        """Test that the forward matrix has orthonormal rows"""
        for shape in PATCH_SHAPES:
            D = OrthoDct(shape).forward(np.eye(int(np.prod(shape))))
            assert_allclose(D @ D.T, np.eye(D.shape[0]), atol=1e-12)

    def test_parseval(self):
        """Test that the transform preserves the Frobenius norm"""
        rng = np.random.default_rng(0)
        for shape in PATCH_SHAPES:
            transform = OrthoDct(shape)
            Y = rng.standard_normal((transform.m, 5))
            A = dct_forward(transform, Y)
            self.assertAlmostEqual(np.linalg.norm(A), np.linalg.norm(Y), delta=1e-12 * np.linalg.norm(Y))

    def test_inverse(self):
        """Test that inverse undoes forward"""
        rng = np.random.default_rng(1)
        for shape in PATCH_SHAPES:
            transform = OrthoDct(shape)
            Y = rng.standard_normal((transform.m, 3))
            assert_allclose(dct_inverse(transform, dct_forward(transform, Y)), Y, atol=1e-12)

    def test_matches_dense_cosine_matrix(self):
        """Test the fast transform against the kron of cosine matrices"""
        rng = np.random.default_rng(2)
        for shape in [(8,), (4, 4), (3, 5), (2, 3, 4)]:
            transform = OrthoDct(shape)
            Y = rng.standard_normal((transform.m, 4))
            assert_allclose(transform.forward(Y), dense_dct(shape) @ Y, atol=1e-12)

    def test_constant_patch_has_only_dc(self):
        """Test that a constant patch maps to a single DC coefficient"""
        transform = OrthoDct((4, 4))
        A = transform.forward(np.full((16, 1), 3.0))
        self.assertAlmostEqual(A[0, 0], 12.0)
        assert_allclose(A[1:, 0], 0.0, atol=1e-12)

    def test_worker_count_does_not_change_results(self):
        """Test that 1, 2 and 8 scipy.fft workers agree"""
        Y = np.random.default_rng(3).standard_normal((64, 50))
        reference = OrthoDct((8, 8), workers=1).forward(Y)
        for workers in (2, 8):
            assert_allclose(OrthoDct((8, 8), workers=workers).forward(Y), reference, rtol=0, atol=1e-12)

    def test_rejects_wrong_patch_length(self):
        """Test that columns of another length are rejected"""
        with self.assertRaises(ShapeMismatchError):
            OrthoDct((4, 4)).forward(np.zeros((15, 2)))

    def test_dictionary_is_synthesis(self):
        """Test that the dictionary of the DCT synthesizes patches from coefficients"""
        transform = OrthoDct((4, 4))
        dictionary = transform.dictionary()
        A = np.random.default_rng(4).standard_normal((16, 3))
        assert_allclose(dict_apply(dictionary, A), transform.inverse(A), atol=1e-12)
        self.assertEqual(dictionary.norm_bound, 1.0)


class TestDictionary(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_apply_and_adjoint(self):
        """Test that the adjoint satisfies <DA, Y> = <A, DᵀY>"""
        rng = np.random.default_rng(5)
        dictionary = Dictionary(rng.standard_normal((4, 8)))
        A = rng.standard_normal((8, 3))
        Y = rng.standard_normal((4, 3))
        self.assertAlmostEqual(np.sum(dict_apply(dictionary, A) * Y), np.sum(A * dict_adjoint(dictionary, Y)))
        with self.assertRaises(ShapeMismatchError):
            dict_apply(dictionary, np.zeros((4, 3)))

    def test_spectral_norm_upper_bound(self):
        """Test that the power-iteration estimate bounds the true norm within the safety margin"""
        rng = np.random.default_rng(6)
        for p in (4, 8, 16):
            atoms = rng.standard_normal((4, p))
            exact = np.linalg.norm(atoms, 2)
            estimate = spectral_norm(Dictionary(atoms))
            self.assertGreaterEqual(estimate, exact)
            self.assertLessEqual(estimate, NORM_SAFETY * exact * (1 + 1e-6))

    def test_spectral_norm_of_dct(self):
        """Test that an orthonormal matrix has norm one"""
        self.assertAlmostEqual(spectral_norm(Dictionary(dct_matrix(8).T)), NORM_SAFETY, places=9)

    def test_zero_dictionary(self):
        """Test that the norm of a zero matrix is rejected"""
        with self.assertRaises(DictionaryError):
            spectral_norm(Dictionary(np.zeros((3, 3))))

    def test_file_round_trip(self):
        """Test the binary dictionary format"""
        atoms = np.arange(12.0).reshape(3, 4)
        path = self.tmp / "d.bin"
        save_dictionary(Dictionary(atoms), path)
        raw = path.read_bytes()
        self.assertEqual(struct.unpack("<qq", raw[:16]), (3, 4))
        self.assertEqual(struct.unpack("<d", raw[16:24])[0], 0.0)
        self.assertEqual(struct.unpack("<d", raw[24:32])[0], 4.0)
        np.testing.assert_array_equal(load_dictionary(path).atoms, atoms)

    def test_truncated_file(self):
        """Test that short headers and payloads are rejected"""
        short = self.tmp / "short.bin"
        short.write_bytes(b"\x01\x00")
        with self.assertRaises(DictionaryError):
            load_dictionary(short)
        payload = self.tmp / "payload.bin"
        payload.write_bytes(struct.pack("<qq", 2, 2) + b"\x00" * 8)
        with self.assertRaises(DictionaryError):
            load_dictionary(payload)
