import numpy as np
import pytest

from kreinpair import gap_distance, orthonormal_span, split
from kreinpair.analysis import analyze_operator
from kreinpair.errors import DimensionMismatch, PipelineError
from kreinpair.sturm_liouville import (
    GridSpec,
    PotentialSpec,
    StudyRow,
    cayley_norm,
    convergence_study,
    discretize,
    dissipation_quadrature_residual,
    mask_splitting,
    omega_block,
    write_study_csv,
)

from conftest import e


def left_half(grid, imq=1.0, h=1.0):
    return PotentialSpec.from_intervals(grid, [(0.0, 0.5)], imq, h)


class TestSpecs:
    def test_grid_validation(self):
        with pytest.raises(DimensionMismatch):
            GridSpec(x_max=10.0, n_points=4)
        with pytest.raises(DimensionMismatch):
            GridSpec(x_max=-1.0, n_points=16)

    def test_grid_step_and_centers(self):
        grid = GridSpec(x_max=8.0, n_points=16)
        assert grid.step == pytest.approx(0.5)
        centers = grid.cell_centers()
        assert centers[0] == pytest.approx(0.25)
        assert centers[-1] == pytest.approx(7.75)

    def test_potential_validation(self):
        grid = GridSpec(x_max=8.0, n_points=16)
        mask = np.zeros(16, bool)
        mask[:4] = True
        with pytest.raises(DimensionMismatch):
            # vanishing imaginary part on the mask
            PotentialSpec(omega_mask=mask, q_values=np.zeros(16, complex), h=0.0)
        with pytest.raises(DimensionMismatch):
            # support off the mask
            PotentialSpec(
                omega_mask=mask, q_values=np.full(16, 1j), h=0.0
            )
        with pytest.raises(DimensionMismatch):
            PotentialSpec(
                omega_mask=mask,
                q_values=np.where(mask, 1j, 0),
                h=float("nan"),
            )
        with pytest.raises(DimensionMismatch):
            PotentialSpec.from_intervals(grid, [(0.0, 0.5)], 0.0, 1.0)

    def test_interval_mask(self):
        grid = GridSpec(x_max=8.0, n_points=16)
        pot = left_half(grid)
        assert pot.omega_mask.sum() == 8
        assert pot.omega_mask[:8].all() and not pot.omega_mask[8:].any()

    def test_study_row_rejects_expansion(self):
        with pytest.raises(PipelineError):
            StudyRow(level=0, n_points=8, x_max=1.0, cayley_norm=1.1,
                     form_residual=0.0)


class TestDiscretize:
    def test_free_operator_is_symmetric(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = PotentialSpec(
            omega_mask=np.zeros(16, bool), q_values=np.zeros(16, complex), h=0.0
        )
        op = discretize(grid, pot)
        assert op.classify() == "symmetric"
        assert split(op).symmetric.domain.is_full

    def test_uniform_imaginary_potential(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = PotentialSpec.from_intervals(grid, [(0.0, 1.0)], 1.0, 0.0)
        op = discretize(grid, pot)
        assert np.allclose(op.dissipation_matrix, 2.0 * np.eye(16), atol=1e-12)
        assert split(op).symmetric.domain.is_zero

    def test_masked_potential_form(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        op = discretize(grid, pot)
        assert np.allclose(
            op.dissipation_matrix, 2.0 * np.diag(pot.omega_mask.astype(float)),
            atol=1e-12,
        )

    def test_robin_parameter_enters_first_entry(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        a0 = discretize(grid, left_half(grid, h=0.0)).matrix[0, 0]
        a1 = discretize(grid, left_half(grid, h=1.0)).matrix[0, 0]
        assert a1.real > a0.real  # attractive Robin term stiffens the corner

    def test_interfaces_decouple_blocks(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        m = discretize(grid, pot).matrix
        assert m[7, 8] == 0.0 and m[8, 7] == 0.0
        # off-mask block below the interface keeps its coupling
        assert m[9, 10] != 0.0


class TestMaskSplitting:
    def test_full_mask(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = PotentialSpec.from_intervals(grid, [(0.0, 1.0)], 1.0, 0.0)
        op = discretize(grid, pot)
        s = mask_splitting(op, pot.omega_mask)
        assert s.symmetric.domain.is_zero

    def test_single_point_mask(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        mask = np.zeros(16, bool)
        mask[5] = True
        pot = PotentialSpec(omega_mask=mask,
                            q_values=np.where(mask, 1j, 0), h=0.0)
        op = discretize(grid, pot)
        s = mask_splitting(op, mask)
        assert gap_distance(
            s.defect.domain, orthonormal_span([e(16, 5)])
        ) < 1e-12

    def test_left_half_agrees_with_generic_splitting(self):
        grid = GridSpec(x_max=20.0, n_points=64)
        pot = left_half(grid)
        op = discretize(grid, pot)
        s = mask_splitting(op, pot.omega_mask)
        generic = split(op)
        assert gap_distance(s.defect.domain, generic.defect.domain) < 1e-8
        assert gap_distance(s.symmetric.domain, generic.symmetric.domain) < 1e-8

    def test_wrong_mask_rejected(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        op = discretize(grid, pot)
        wrong = np.roll(pot.omega_mask, 3)
        with pytest.raises(PipelineError):
            mask_splitting(op, wrong)


class TestQuadrature:
    def test_vector_off_mask_has_zero_form(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        op = discretize(grid, pot)
        x = e(16, 12)
        assert abs(op.dissipation_form(x, x)) < 1e-14

    def test_single_point_indicator(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        op = discretize(grid, pot)
        s = grid.step
        x = np.sqrt(s) * e(16, 3)  # function value 1 at one mask point
        assert op.dissipation_form(x, x).real == pytest.approx(2.0 * s)

    def test_random_samples_residual(self):
        grid = GridSpec(x_max=20.0, n_points=128)
        pot = left_half(grid)
        op = discretize(grid, pot)
        res = dissipation_quadrature_residual(
            op, grid, pot, samples=100, rng=np.random.default_rng(0)
        )
        assert res < 1e-10


class TestCayley:
    def test_purely_imaginary_scalar(self):
        assert cayley_norm(np.array([[1j]])) == pytest.approx(0.0)

    def test_real_scalar_on_unit_circle(self):
        assert cayley_norm(np.array([[7.0]])) == pytest.approx(1.0)
        assert cayley_norm(np.array([[-3.0]])) == pytest.approx(1.0)

    def test_contraction_for_dissipative_block(self):
        grid = GridSpec(x_max=20.0, n_points=64)
        pot = left_half(grid)
        op = discretize(grid, pot)
        norm = cayley_norm(omega_block(op, pot.omega_mask))
        assert norm < 1.0

    def test_singular_shift_rejected(self):
        with pytest.raises(PipelineError):
            cayley_norm(np.array([[-1j]]))

    def test_omega_block_shape(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        pot = left_half(grid)
        op = discretize(grid, pot)
        block = omega_block(op, pot.omega_mask)
        assert block.shape == (8, 8)
        with pytest.raises(DimensionMismatch):
            omega_block(op, np.zeros(16, bool))


class TestStudy:
    def test_small_study_monotone(self):
        rows = convergence_study(10.0, 16, [(0.0, 0.5)], 1.0, 1.0, 3, seed=0)
        norms = [r.cayley_norm for r in rows]
        assert all(n <= 1.0 + 1e-10 for n in norms)
        assert all(b >= a - 1e-6 for a, b in zip(norms, norms[1:]))
        assert [r.n_points for r in rows] == [16, 32, 64]

    def test_single_cell_mask_stays_contractive(self):
        grid = GridSpec(x_max=10.0, n_points=16)
        frac = 1.0 / 16.0
        rows = convergence_study(10.0, 16, [(0.0, frac)], 1.0, 0.0, 3, seed=0)
        assert all(r.cayley_norm <= 1.0 + 1e-10 for r in rows)

    def test_robin_sweep_same_conclusion(self):
        finals = []
        for h in (-1.0, 0.0, 1.0):
            rows = convergence_study(10.0, 16, [(0.0, 0.5)], 1.0, h, 3, seed=0)
            norms = [r.cayley_norm for r in rows]
            assert all(b >= a - 1e-6 for a, b in zip(norms, norms[1:]))
            finals.append(norms[-1])
        assert all(f > 0.99 for f in finals)

    def test_levels_validated(self):
        with pytest.raises(DimensionMismatch):
            convergence_study(10.0, 16, [(0.0, 0.5)], 1.0, 1.0, 2)

    def test_csv_format(self, tmp_path):
        rows = convergence_study(10.0, 16, [(0.0, 0.5)], 1.0, 1.0, 3, seed=0)
        path = tmp_path / "study.csv"
        write_study_csv(rows, path)
        text = path.read_text(encoding="utf-8")
        lines = text.strip().split("\n")
        assert lines[0] == "level,n_points,x_max,cayley_norm,gamma_residual"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "16"
        assert float(first[3]) == pytest.approx(rows[0].cayley_norm)


class TestFullPipelineOnDiscretization:
    def test_discretized_operator_passes_all_checks(self):
        grid = GridSpec(x_max=10.0, n_points=32)
        pot = left_half(grid)
        op = discretize(grid, pot)
        report = analyze_operator(op, seed=0)
        assert all(report["checks"].values()), report["checks"]
        assert report["dims"]["defect_part"] == int(pot.omega_mask.sum())

    def test_boundary_map_is_restriction_to_mask(self):
        from kreinpair import boundary_map_projection

        grid = GridSpec(x_max=10.0, n_points=32)
        pot = left_half(grid)
        op = discretize(grid, pot)
        s = mask_splitting(op, pot.omega_mask)
        pair = boundary_map_projection(op, s)
        # domain basis is the identity here, so the map should be the
        # coordinate projection onto the mask
        expected = np.diag(pot.omega_mask.astype(float))
        assert np.linalg.norm(pair.matrix - expected, 2) < 1e-8
