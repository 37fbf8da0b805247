import numpy as np
import pytest

from covlss.population import (
    SpectrumSpec,
    assemble_model,
    build_model,
    build_spectrum,
    haar_orthogonal,
)
from covlss.symmat import trace_set


def spec_with(p, n, alpha, beta, r=None, diagonal_only=False):
    if r is None:
        r = np.full(p, 0.5)
    return SpectrumSpec(p=p, n=n, alpha=alpha, beta=beta, r_values=np.asarray(r, float),
                        diagonal_only=diagonal_only)


class TestBuildSpectrum:
    def test_no_spikes_half_r(self):
        lam = build_spectrum(spec_with(4, 100, 0.0, 0.0))
        assert np.allclose(lam, [1.0, 1.0, 1.0, 1.0])

    def test_two_spikes(self):
        lam = build_spectrum(spec_with(4, 100, 0.5, 0.5))
        assert np.allclose(lam, [25.0, 25.0, 1.0, 1.0])

    def test_grouped_ranges(self):
        rng = np.random.default_rng(5)
        p, n = 100, 1000
        lam = build_spectrum(spec_with(p, n, 0.2, 0.1, r=rng.random(p)))
        growth = n**0.2
        spikes, bulk = lam[:10], lam[10:]
        assert len(spikes) == 10 and len(bulk) == 90
        assert np.all(spikes >= 2 * growth) and np.all(spikes <= 3 * growth)
        assert np.all(bulk > 0) and np.all(bulk < 2)
        assert np.all(np.diff(lam) <= 0)

    def test_rejects_bad_r(self):
        with pytest.raises(ValueError):
            spec_with(2, 10, 0.0, 0.0, r=[0.5, 1.0])
        with pytest.raises(ValueError):
            spec_with(2, 10, 0.0, 0.0, r=[0.0, 0.5])

    def test_rejects_bad_beta(self):
        with pytest.raises(ValueError):
            spec_with(2, 10, 0.0, 1.5)
        with pytest.raises(ValueError):
            spec_with(2, 10, 0.0, -0.1)

    def test_spike_count_floors(self):
        assert spec_with(5, 10, 0.1, 0.5).spike_count == 2
        assert spec_with(5, 10, 0.1, 1.0).spike_count == 5


class TestHaarOrthogonal:
    def test_one_by_one(self):
        for seed in range(5):
            u = haar_orthogonal(1, seed)
            assert u.shape == (1, 1)
            assert abs(abs(u[0, 0]) - 1.0) < 1e-12

    def test_orthogonality(self):
        u = haar_orthogonal(5, 42)
        assert np.linalg.norm(u @ u.T - np.eye(5)) <= 1e-10

    def test_deterministic(self):
        assert np.array_equal(haar_orthogonal(8, 3), haar_orthogonal(8, 3))

    def test_first_entry_second_moment(self):
        # Haar columns are uniform on the sphere: E u_00^2 = 1/p
        p, trials = 50, 1000
        vals = np.array([haar_orthogonal(p, seed)[0, 0] ** 2 for seed in range(trials)])
        # Var(u^2) is approximately 2/p^2 for large p
        se = np.sqrt(2.0 / p**2 / trials)
        assert abs(vals.mean() - 1.0 / p) <= 3 * se + 1e-4


class TestAssembleModel:
    def test_identity(self):
        m = assemble_model([1.0, 1.0, 1.0])
        assert np.array_equal(m.sigma.array, np.eye(3))
        assert np.array_equal(m.sigma_half.array, np.eye(3))
        assert m.is_diagonal

    def test_diagonal_square_root(self):
        m = assemble_model([4.0, 1.0])
        assert np.allclose(m.sigma.array, np.diag([4.0, 1.0]))
        assert np.allclose(m.sigma_half.array, np.diag([2.0, 1.0]))

    def test_trace_invariance_under_conjugation(self):
        eigs = [25.0, 25.0, 1.0, 1.0]
        for seed in range(5):
            m = assemble_model(eigs, haar_orthogonal(4, seed))
            assert m.traces.tr1 == pytest.approx(52.0, rel=1e-10)
            assert m.traces.tr2 == pytest.approx(1252.0, rel=1e-10)

    def test_square_root_squares_back(self):
        m = assemble_model([9.0, 4.0, 0.5], haar_orthogonal(3, 11))
        err = np.linalg.norm(m.sigma_half.array @ m.sigma_half.array - m.sigma.array)
        assert err <= 1e-8 * np.linalg.norm(m.sigma.array)

    def test_rejects_nonpositive_eigenvalue(self):
        with pytest.raises(ValueError):
            assemble_model([1.0, 0.0])
        with pytest.raises(ValueError):
            assemble_model([1.0, -2.0])

    def test_rejects_non_orthogonal_u(self):
        with pytest.raises(ValueError):
            assemble_model([1.0, 2.0], np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_full_trace_set_conjugation_invariant(self):
        rng = np.random.default_rng(17)
        eigs = np.sort(rng.uniform(0.5, 5.0, 50))[::-1]
        base = assemble_model(eigs.copy()).traces
        for seed in range(20):
            rotated = assemble_model(eigs.copy(), haar_orthogonal(50, seed)).traces
            for field in ("tr1", "tr2", "tr3", "tr4"):
                got, want = getattr(rotated, field), getattr(base, field)
                assert got == pytest.approx(want, rel=1e-8)

    def test_hadamard_trace_not_conjugation_invariant(self):
        # tr(S∘S) depends on the eigenvector basis: only the diagonal
        # regime pins it to the eigenvalue power sum
        eigs = np.array([5.0, 1.0, 0.5])
        plain = assemble_model(eigs.copy())
        rotated = assemble_model(eigs.copy(), haar_orthogonal(3, 2))
        assert plain.traces.trH11 == pytest.approx(float(np.sum(eigs**2)), rel=1e-12)
        assert abs(rotated.traces.trH11 - plain.traces.trH11) > 1e-3


class TestBuildModel:
    def test_diagonal_only_skips_rotation(self):
        spec = spec_with(4, 100, 0.5, 0.5, diagonal_only=True)
        m = build_model(spec, rotation_seed=9)
        assert m.is_diagonal
        assert np.allclose(m.sigma.array, np.diag(m.eigenvalues))

    def test_spectral_norm_tracks_n_growth(self):
        rng = np.random.default_rng(23)
        r = rng.random(10)
        alpha = 0.3
        lam_n = build_spectrum(spec_with(10, 400, alpha, 0.2, r=r))
        lam_2n = build_spectrum(spec_with(10, 800, alpha, 0.2, r=r))
        assert lam_2n[0] / lam_n[0] == pytest.approx(2.0**alpha, rel=1e-10)

    def test_traces_match_eigenvalues(self):
        spec = spec_with(20, 200, 0.4, 0.25, r=np.random.default_rng(3).random(20))
        m = build_model(spec, rotation_seed=4)
        for k in (1, 2, 3, 4):
            want = float(np.sum(m.eigenvalues**k))
            got = getattr(m.traces, f"tr{k}")
            assert got == pytest.approx(want, rel=1e-8)

    def test_positive_definite(self):
        spec = spec_with(12, 300, 1.0, 0.2, r=np.random.default_rng(8).random(12))
        m = build_model(spec, rotation_seed=1)
        assert np.all(np.linalg.eigvalsh(m.sigma.array) > 0)

    def test_trace_set_of_sigma_matches_bundle(self):
        spec = spec_with(6, 50, 0.2, 0.5, r=np.random.default_rng(2).random(6))
        m = build_model(spec, rotation_seed=0)
        assert trace_set(m.sigma) == m.traces
