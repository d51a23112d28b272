import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canopyboost.features import (
    CovarianceFeatures,
    CovarianceMatrix,
    FeatureGrid,
    average_raster,
    build_feature_grid,
    estimate_covariance,
    export_feature_csv,
    extract_features,
    feature_dimension,
    features_to_covariance_parts,
    read_feature_grid,
    write_feature_grid,
)
from canopyboost.sardata import FormatError, HeightRaster, SlcStack, geometry_from_baselines
from canopyboost.simulator import SceneSpec, covariance_model_batch, draw_speckle, simulate_stack


def noise_stack(nb=2, rows=9, cols=11, seed=0):
    rng = np.random.default_rng(seed)
    g = geometry_from_baselines([0.0] + [-12.0 * (k + 1) for k in range(nb - 1)])
    shape = (3 * nb, rows, cols)
    return SlcStack(g, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.mark.parametrize("nb, m", [(1, 7), (2, 16), (6, 52)])
def test_feature_dimension(nb, m):
    assert feature_dimension(nb) == m


class TestEstimate:
    def test_single_look_is_outer_product(self):
        s = noise_stack()
        R = estimate_covariance(s, (4, 5), 1)
        u = s.samples[:, 4, 5]
        np.testing.assert_allclose(R.entries, np.outer(u, u.conj()), rtol=1e-14)
        assert np.linalg.matrix_rank(R.entries, tol=1e-9 * R.trace()) == 1
        assert R.trace() == pytest.approx(np.sum(np.abs(u) ** 2))

    def test_order_18_for_six_tracks(self):
        R = estimate_covariance(noise_stack(nb=6, rows=5, cols=5), (2, 2), 5)
        assert R.order == 18 and R.n_baselines == 6 and R.window == 5

    def test_brute_force_sum(self):
        s = noise_stack()
        R = estimate_covariance(s, (4, 4), 3)
        expect = sum(np.outer(s.samples[:, r, c], s.samples[:, r, c].conj())
                     for r in range(3, 6) for c in range(3, 6)) / 9
        np.testing.assert_allclose(R.entries, expect, rtol=1e-12)

    def test_valid_matrix(self):
        R = estimate_covariance(noise_stack(), (4, 5), 7)
        assert R.is_valid()
        assert R.hermitian_error() == 0.0

    @pytest.mark.parametrize("center, window", [((0, 5), 3), ((4, 10), 3), ((4, 5), 11)])
    def test_out_of_bounds(self, center, window):
        with pytest.raises(ValueError, match="exceeds"):
            estimate_covariance(noise_stack(), center, window)

    @pytest.mark.parametrize("window", [0, 2, 28, -3])
    def test_bad_window(self, window):
        with pytest.raises(ValueError, match="odd"):
            estimate_covariance(noise_stack(), (4, 5), window)

    def test_converges_to_model_at_w49(self):
        geometry = geometry_from_baselines([0.0, -14.0, -30.0, -44.0, -60.0, -75.0])
        R_true = covariance_model_batch(np.array([12.0]), np.array([10.0]), SceneSpec(), geometry)[0]
        n = 49 * 49
        # E||R - R_true||_F^2 = tr(R_true)^2 / n for circular Gaussian samples
        expected = np.trace(R_true).real / np.linalg.norm(R_true) / np.sqrt(n)
        assert expected < 0.045
        rng = np.random.default_rng(7)
        u = draw_speckle(np.broadcast_to(R_true, (n,) + R_true.shape), rng)
        stack = SlcStack(geometry, u.T.reshape(18, 49, 49))
        R = estimate_covariance(stack, (24, 24), 49).entries
        assert np.linalg.norm(R - R_true) / np.linalg.norm(R_true) < 0.05


class TestExtract:
    def test_identity_nb2(self):
        x = extract_features(np.eye(6))
        np.testing.assert_array_equal(x, [1] * 6 + [0] * 10)

    def test_layout(self):
        R = np.zeros((6, 6), complex)
        R[np.diag_indices(6)] = np.arange(1, 7)
        R[0, 1:] = [1 + 2j, 3 - 1j, 0.5j, -2, 7 + 7j]
        x = extract_features(CovarianceMatrix(R))
        np.testing.assert_array_equal(x[:6], np.arange(1, 7))
        np.testing.assert_array_equal(x[6:], [1, 2, 3, -1, 0, 0.5, -2, 0, 7, 7])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_reconstruction(self, nb, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((3 * nb, 4 * nb)) + 1j * rng.standard_normal((3 * nb, 4 * nb))
        R = a @ a.conj().T
        x = extract_features(R)
        assert x.shape == (feature_dimension(nb),)
        diag, row = features_to_covariance_parts(x, nb)
        np.testing.assert_array_equal(diag, np.diag(R).real)
        np.testing.assert_array_equal(row[1:], R[0, 1:])

    def test_parts_length_checked(self):
        with pytest.raises(ValueError):
            features_to_covariance_parts(np.zeros(15), 2)


class TestGrid:
    def test_dims(self):
        g = build_feature_grid(noise_stack(rows=100, cols=80), 27)
        assert (g.rows, g.cols, g.n_features, g.valid_offset) == (74, 54, 16, 13)

    def test_exact_fit(self):
        g = build_feature_grid(noise_stack(rows=49, cols=49), 49)
        assert (g.rows, g.cols) == (1, 1)

    def test_too_small(self):
        with pytest.raises(ValueError, match="does not fit"):
            build_feature_grid(noise_stack(rows=5, cols=9), 7)

    def test_matches_direct_estimate(self):
        s = noise_stack(nb=3, rows=15, cols=17)
        g = build_feature_grid(s, 5)
        for r, c in [(0, 0), (5, 6), (10, 12)]:
            direct = extract_features(estimate_covariance(s, (r + 2, c + 2), 5))
            np.testing.assert_allclose(g.values[r, c], direct, rtol=1e-10, atol=1e-12)

    def test_transformer(self):
        s = noise_stack(rows=12, cols=12)
        t = CovarianceFeatures(window=3).fit(s)
        X = t.transform(s)
        assert X.shape == (100, 16) and t.n_features_out_ == 16
        np.testing.assert_array_equal(X, build_feature_grid(s, 3).as_matrix())

    def test_diagonals_unaffected_by_phase_screens(self):
        spec = SceneSpec(rows=40, cols=40, phase_screen_correlation_length=10.0, seed=3)
        nc, _, _ = simulate_stack(spec)
        c, _, _ = simulate_stack(spec.replace(phase_screen_sigma=0.0))
        gnc, gc = build_feature_grid(nc, 9), build_feature_grid(c, 9)
        np.testing.assert_allclose(gnc.values[..., :18], gc.values[..., :18], rtol=1e-12, atol=0)
        assert not np.allclose(gnc.values[..., 18:], gc.values[..., 18:])

    def test_roundtrip(self, tmp_path):
        g = build_feature_grid(noise_stack(rows=12, cols=10), 3)
        write_feature_grid(g, tmp_path / "f")
        back = read_feature_grid(tmp_path / "f.hdr.json")
        assert (back.valid_offset, back.window) == (1, 3)
        assert back.values.tobytes() == g.values.astype("<f4").tobytes()

    def test_truncated_file(self, tmp_path):
        write_feature_grid(build_feature_grid(noise_stack(), 3), tmp_path / "f")
        (tmp_path / "f.f32").write_bytes(b"\0" * 12)
        with pytest.raises(FormatError):
            read_feature_grid(tmp_path / "f")

    def test_csv_export(self, tmp_path):
        g = FeatureGrid(np.arange(12.0).reshape(2, 1, 6), valid_offset=0, window=1)
        export_feature_csv(g, tmp_path / "f.csv")
        lines = (tmp_path / "f.csv").read_text().splitlines()
        assert lines[0] == "f0,f1,f2,f3,f4,f5"
        assert lines[2].split(",")[0] == "6"


class TestAverage:
    def test_constant(self):
        out = average_raster(HeightRaster(np.full((10, 12), 30.0)), 5)
        assert out.shape == (6, 8) and out.valid_offset == 2
        assert np.all(out.values == 30.0)

    def test_single_peak(self):
        out = average_raster(HeightRaster([[0, 0, 0], [0, 9, 0], [0, 0, 0]]), 3)
        assert out.shape == (1, 1) and out.values[0, 0] == 1.0

    def test_aligned_with_grid(self):
        s = noise_stack(rows=30, cols=25)
        g = build_feature_grid(s, 9)
        a = average_raster(HeightRaster(np.ones((30, 25))), 9)
        assert a.shape == (g.rows, g.cols) and a.valid_offset == g.valid_offset

    def test_kind_preserved(self):
        out = average_raster(HeightRaster(np.ones((3, 3)) * -2, kind="DTM"), 3)
        assert out.kind == "DTM" and out.values[0, 0] == -2

    def test_even_window(self):
        with pytest.raises(ValueError, match="odd"):
            average_raster(HeightRaster(np.ones((9, 9))), 4)
