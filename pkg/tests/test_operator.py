"""Tests for A_n, the weak forms and the heat-equation stepper."""

import numpy as np
import pytest

from she_spectrum.tools.errors import InvalidInputError, StabilityError
from she_spectrum.tools.grid import make_partition
from she_spectrum.tools.noise import BrownianPath, coarsen, iid_noise, sample_path
from she_spectrum.tools.operator import (
    OperatorParams,
    WeakFormVariant,
    apply_discrete,
    assemble_matrix,
    max_stable_dt,
    simulate_she,
    weak_form_continuum,
    weak_form_discrete,
)


def sine_mode(j: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sqrt(2) sin(j pi x) and its derivative."""
    return np.sqrt(2.0) * np.sin(j * np.pi * x), np.sqrt(2.0) * j * np.pi * np.cos(j * np.pi * x)


class TestOperatorParams:
    """Tests for OperatorParams."""

    def test_beta_must_be_positive(self):
        """Test that beta <= 0 is rejected."""
        with pytest.raises(InvalidInputError):
            OperatorParams(0.0, 4)

    def test_n_must_be_positive(self):
        """Test that n = 0 is rejected."""
        with pytest.raises(InvalidInputError):
            OperatorParams(1.0, 0)


class TestAssembleMatrix:
    """Tests for assemble_matrix."""

    def test_noise_free_entries(self):
        """Test the discrete Laplacian scaling beta (n+1)^2."""
        T = assemble_matrix(OperatorParams(1.0, 2), iid_noise(0, 2, scale=0.0))
        assert T.diag.tolist() == [-18.0, -18.0]
        assert T.offdiag.tolist() == [9.0]

    def test_noise_on_diagonal(self):
        """Test that X_i / dx is added to the diagonal."""
        noise = iid_noise(0, 3, draws=[1.0, 0.0, -1.0])
        T = assemble_matrix(OperatorParams(2.0, 3), noise)
        expected = noise.x / 0.25 - 2.0 * 2.0 * 16.0
        assert np.allclose(T.diag, expected)
        assert np.allclose(T.offdiag, [32.0, 32.0])

    def test_symmetric(self):
        """Test that the dense form equals its transpose."""
        dense = assemble_matrix(OperatorParams(1.0, 10), iid_noise(1, 10)).to_dense()
        assert dense.asymmetry == 0.0

    def test_noise_size_mismatch(self):
        """Test that the increments must match n."""
        with pytest.raises(InvalidInputError):
            assemble_matrix(OperatorParams(1.0, 4), iid_noise(0, 5))


class TestApplyDiscrete:
    """Tests for apply_discrete."""

    def test_matches_matrix(self):
        """Test that the stencil equals the matrix-vector product."""
        params = OperatorParams(1.5, 20)
        noise = iid_noise(8, 20)
        u = np.random.default_rng(0).standard_normal(20)
        expected = assemble_matrix(params, noise).matvec(u)
        assert np.allclose(apply_discrete(u, params, noise), expected)

    def test_sine_is_eigenvector(self, closed_form):
        """Test A_n sin(pi x_i) = -lambda_1 sin(pi x_i) without noise."""
        params = OperatorParams(1.0, 15)
        u = np.sin(np.pi * make_partition(15).interior)
        result = apply_discrete(u, params, iid_noise(0, 15, scale=0.0))
        assert np.allclose(result, -closed_form(15, 1) * u)


class TestWeakFormContinuum:
    """Tests for weak_form_continuum."""

    def test_zero_path_gives_dirichlet_form(self):
        """Test <Lu, u> = -beta pi^2 for the first sine mode on the zero path."""
        path = sample_path(0, 1024, scale=0.0)
        u, du = sine_mode(1, path.times)
        value = weak_form_continuum(u, du, u, du, 1.0, path)
        assert value == pytest.approx(-np.pi**2, rel=1e-12)

    def test_left_endpoint_rule(self):
        """Test the O(1/fine_n) quadrature residue for distinct modes on the zero path."""
        path = sample_path(0, 1024, scale=0.0)
        u, du = sine_mode(1, path.times)
        v, dv = sine_mode(2, path.times)
        # Left sums of cos(m pi t) over [0, 1) equal 1 for odd m, so u'v' leaves 4 pi^2 / fine_n.
        value = weak_form_continuum(u, du, v, dv, 1.0, path)
        assert value == pytest.approx(-4.0 * np.pi**2 / 1024, rel=1e-9)

    def test_boundary_checked(self):
        """Test that u must vanish at the endpoints."""
        path = sample_path(0, 8)
        ones = np.ones(9)
        with pytest.raises(InvalidInputError, match="vanish"):
            weak_form_continuum(ones, ones, ones, ones, 1.0, path)

    def test_length_checked(self):
        """Test that samples must live on the fine grid."""
        path = sample_path(0, 8)
        with pytest.raises(InvalidInputError):
            weak_form_continuum(np.zeros(5), np.zeros(5), np.zeros(5), np.zeros(5), 1.0, path)

    def test_variants_agree_on_refinement(self):
        """Test that |ito - by_parts| shrinks with the fine grid, median over 20 seeds."""
        medians = []
        for fine_n in (2**12, 2**14, 2**16):
            diffs = []
            for seed in range(20):
                path = sample_path(seed, fine_n)
                u, du = sine_mode(1, path.times)
                ito = weak_form_continuum(u, du, u, du, 1.0, path, WeakFormVariant.ITO)
                by_parts = weak_form_continuum(u, du, u, du, 1.0, path, "by_parts")
                diffs.append(abs(ito - by_parts))
            medians.append(float(np.median(diffs)))
        assert medians[1] < medians[0]
        assert medians[2] < medians[1]
        # At least as fast as fine_n^(-1/2), up to a factor of 3.
        assert medians[1] <= 3.0 * medians[0] * 0.5
        assert medians[2] <= 3.0 * medians[1] * 0.5

    @pytest.mark.parametrize("variant", ["ito", "by_parts"])
    def test_bilinear(self, variant):
        """Test that scaling u or v by c scales the form by c."""
        path = sample_path(12, 2048)
        u, du = sine_mode(1, path.times)
        v, dv = sine_mode(3, path.times)
        u[-1] = v[-1] = 0.0
        base = weak_form_continuum(u, du, v, dv, 1.5, path, variant)
        scaled_u = weak_form_continuum(-2.5 * u, -2.5 * du, v, dv, 1.5, path, variant)
        scaled_v = weak_form_continuum(u, du, 4.0 * v, 4.0 * dv, 1.5, path, variant)
        assert scaled_u == pytest.approx(-2.5 * base, rel=1e-12, abs=1e-12)
        assert scaled_v == pytest.approx(4.0 * base, rel=1e-12, abs=1e-12)


class TestWeakFormDiscrete:
    """Tests for weak_form_discrete."""

    def test_sine_mode_without_noise(self, closed_form):
        """Test <L_n u, u> = -lambda_1 for u = sqrt(2) sin(pi x)."""
        partition = make_partition(31)
        u, _ = sine_mode(1, partition.points)
        u[-1] = 0.0
        value = weak_form_discrete(u, u, OperatorParams(1.0, 31), iid_noise(0, 31, scale=0.0))
        assert value == pytest.approx(-closed_form(31, 1), rel=1e-12)

    def test_noise_term(self):
        """Test that the noise contributes sum u_i v_i X_i."""
        path = BrownianPath.from_values([0.0, 0.3, -0.1, 0.4])
        noise = coarsen(path, 2)
        params = OperatorParams(1.0, 2)
        u = np.array([0.0, 1.0, 2.0, 0.0])
        quiet = iid_noise(0, 2, scale=0.0)
        difference = weak_form_discrete(u, u, params, noise) - weak_form_discrete(
            u, u, params, quiet
        )
        assert difference == pytest.approx(1.0 * noise.x[0] + 4.0 * noise.x[1])

    def test_symmetric(self):
        """Test <L_n u, v> = <L_n v, u> with noise."""
        n = 31
        params = OperatorParams(2.0, n)
        rng = np.random.default_rng(3)
        u = np.pad(rng.standard_normal(n), 1)
        v = np.pad(rng.standard_normal(n), 1)
        noise = iid_noise(13, n)
        forward = weak_form_discrete(u, v, params, noise)
        backward = weak_form_discrete(v, u, params, noise)
        assert forward == pytest.approx(backward, rel=1e-12, abs=1e-12)

    def test_converges_to_continuum(self):
        """Test that the coupled discrete form approaches the Ito weak form over 20 seeds."""
        levels = (15, 63, 255)
        gaps = []
        for seed in range(20):
            path = sample_path(seed, 2**16)
            u_fine, du_fine = sine_mode(1, path.times)
            u_fine[-1] = 0.0
            target = weak_form_continuum(u_fine, du_fine, u_fine, du_fine, 1.0, path)
            row = []
            for n in levels:
                u, _ = sine_mode(1, make_partition(n).points)
                u[-1] = 0.0
                discrete = weak_form_discrete(u, u, OperatorParams(1.0, n), coarsen(path, n))
                row.append(abs(discrete - target))
            gaps.append(row)
        medians = np.median(np.array(gaps), axis=0)
        assert medians[1] < medians[0]
        assert medians[2] < medians[1]
        assert medians[2] < 0.25 * medians[0]


class TestSimulateShe:
    """Tests for simulate_she."""

    def test_noise_free_decay(self):
        """Test ||u(t)|| / ||u(0)|| = exp(-beta pi^2 t) within 2% at t = 0.1, n = 128."""
        params = OperatorParams(1.0, 128)
        steps = int(np.ceil(0.1 / (0.5 * max_stable_dt(params))))
        dt = 0.1 / steps
        u0 = np.sin(np.pi * make_partition(128).interior)
        states = simulate_she(u0, params, dt, steps, seed=0, noise_on=False, stride=steps)
        ratio = states[-1].l2_norm / states[0].l2_norm
        assert states[-1].t == pytest.approx(0.1)
        assert ratio == pytest.approx(np.exp(-(np.pi**2) * 0.1), rel=0.02)

    def test_zero_initial_data(self):
        """Test that u = 0 stays 0 even with noise."""
        params = OperatorParams(1.0, 16)
        states = simulate_she(np.zeros(16), params, max_stable_dt(params), 50, seed=4)
        assert all(not np.any(state.u) for state in states)

    def test_unstable_dt_rejected(self):
        """Test that the error names the admissible bound."""
        params = OperatorParams(1.0, 9)
        with pytest.raises(StabilityError) as exc_info:
            simulate_she(np.zeros(9), params, 0.01, 10, seed=0)
        assert exc_info.value.max_dt == pytest.approx(0.005)
        assert "0.005" in str(exc_info.value)

    def test_snapshots_at_stride(self):
        """Test that the initial, every stride-th and the final state are kept."""
        params = OperatorParams(1.0, 8)
        dt = max_stable_dt(params)
        states = simulate_she(np.ones(8), params, dt, 10, seed=1, stride=4)
        assert [round(state.t / dt) for state in states] == [0, 4, 8, 10]

    def test_reproducible(self):
        """Test that identical seeds give identical trajectories."""
        params = OperatorParams(1.0, 16)
        u0 = np.sin(np.pi * make_partition(16).interior)
        first = simulate_she(u0, params, max_stable_dt(params), 20, seed=9)
        second = simulate_she(u0, params, max_stable_dt(params), 20, seed=9)
        assert np.array_equal(first[-1].u, second[-1].u)

    def test_single_step(self):
        """Test one noise-free step from u = (1) on n = 1."""
        params = OperatorParams(1.0, 1)
        states = simulate_she([1.0], params, 0.01, 1, seed=0, noise_on=False)
        assert states[-1].u.tolist() == pytest.approx([0.92])
        assert states[-1].t == pytest.approx(0.01)

    @pytest.mark.parametrize("fraction", [0.5, 1.0])
    def test_noise_free_norm_never_grows(self, fraction):
        """Test ||u^(m+1)|| <= ||u^(m)|| at every step up to the stability bound."""
        params = OperatorParams(1.0, 40)
        u0 = np.random.default_rng(8).standard_normal(40)
        dt = fraction * max_stable_dt(params)
        states = simulate_she(u0, params, dt, 200, seed=0, noise_on=False)
        norms = [state.l2_norm for state in states]
        assert len(norms) == 201
        assert all(b <= a * (1.0 + 1e-12) for a, b in zip(norms, norms[1:]))
