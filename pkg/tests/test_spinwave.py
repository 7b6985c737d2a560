import math

import numpy as np
import pytest

from spinlab.longrange_walk import (
    connectivity_bound,
    nn_kernel,
    normalize,
    powerlaw_kernel,
)
from spinlab.spinwave import (
    DeformedSpinWave,
    SpinWaveField,
    _sup_grid,
    cluster_reach,
    compute_R_delta,
    conductance_grid,
    deform,
    dirichlet_energy,
    entropy_bound,
    expected_entropy,
    sample_long_range_bonds,
    solve_spinwave,
)


@pytest.fixture(scope="module")
def nn_walk():
    return normalize(nn_kernel())


@pytest.fixture(scope="module")
def small_wave(nn_walk):
    return solve_spinwave(nn_walk, 8, 2, 1.0)


class TestSolver:
    def test_boundary_values(self, small_wave):
        assert small_wave.at((0, 0)) == 1.0
        assert small_wave.at((2, -2)) == 1.0
        assert small_wave.at((9, 0)) == 0.0
        assert small_wave.at((-9, 9)) == 0.0

    def test_harmonic_residual(self, small_wave):
        c = small_wave.cgrid
        k = (c.shape[0] - 1) // 2
        m = small_wave.margin
        for site in [(3, 0), (-5, 2), (0, 8), (4, -4)]:
            acc = 0.0
            for dx in range(-k, k + 1):
                for dy in range(-k, k + 1):
                    y = (site[0] + dx, site[1] + dy)
                    val = small_wave.values[y[0] + m, y[1] + m] if max(abs(y[0]), abs(y[1])) <= m else 0.0
                    acc += c[dx + k, dy + k] * (val - small_wave.at(site))
            assert abs(acc) < 1e-9 * c.sum()

    def test_maximum_principle(self, small_wave):
        assert small_wave.values.min() >= -1e-10
        assert small_wave.values.max() <= 1.0 + 1e-10

    def test_symmetry(self, small_wave):
        for site in [(3, 1), (5, -2), (0, 7)]:
            assert small_wave.at(site) == pytest.approx(small_wave.at((site[1], site[0])), abs=1e-8)
            assert small_wave.at(site) == pytest.approx(small_wave.at((-site[0], site[1])), abs=1e-8)

    def test_linearity_in_amplitude(self, nn_walk, small_wave):
        double = solve_spinwave(nn_walk, 8, 2, 2.0)
        assert np.allclose(double.values, 2 * small_wave.values, atol=1e-8)

    def test_rejects_inner_too_large(self, nn_walk):
        with pytest.raises(ValueError):
            solve_spinwave(nn_walk, 4, 4, 1.0)

    def test_monte_carlo_hitting_probability(self, nn_walk, small_wave):
        # independent oracle: the harmonic value equals psi times the chance
        # the conductance walk reaches the inner box before leaving the big one
        c = small_wave.cgrid
        k = (c.shape[0] - 1) // 2
        probs = c.ravel() / c.sum()
        ax = np.arange(-k, k + 1)
        dxs = np.repeat(ax, 2 * k + 1)
        dys = np.tile(ax, 2 * k + 1)
        rng = np.random.default_rng(7)
        for start in [(4, 0), (6, 3), (-7, 0)]:
            walkers = 4000
            pos = np.tile(np.asarray(start), (walkers, 1))
            hit = np.zeros(walkers, dtype=bool)
            alive = np.ones(walkers, dtype=bool)
            for _ in range(4000):
                if not alive.any():
                    break
                idx = rng.choice(len(probs), size=int(alive.sum()), p=probs)
                pos[alive, 0] += dxs[idx]
                pos[alive, 1] += dys[idx]
                sup = np.max(np.abs(pos), axis=1)
                hit |= alive & (sup <= 2)
                alive &= (sup > 2) & (sup <= 8)
            assert not alive.any()
            p_hat = hit.mean()
            sigma = math.sqrt(p_hat * (1 - p_hat) / walkers)
            assert abs(small_wave.at(start) - p_hat) < 3 * sigma + 1e-9


class TestDirichletEnergy:
    def test_brute_force_oracle(self, nn_walk):
        rng = np.random.default_rng(11)
        cgrid = conductance_grid(nn_walk, 0.3, radius=3)
        n, margin = 4, 7
        values = np.zeros((2 * margin + 1, 2 * margin + 1))
        box = _sup_grid(margin) <= n
        values[box] = rng.uniform(0, 1, size=int(box.sum()))
        wave = SpinWaveField(n, 1, 1.0, values, margin, cgrid, 0.0)
        direct = 0.0
        for x1 in range(-n, n + 1):
            for x2 in range(-n, n + 1):
                for dx in range(-3, 4):
                    for dy in range(-3, 4):
                        y1, y2 = x1 + dx, x2 + dy
                        v = values[y1 + margin, y2 + margin] if max(abs(y1), abs(y2)) <= margin else 0.0
                        direct += cgrid[dx + 3, dy + 3] * (values[x1 + margin, x2 + margin] - v) ** 2
        assert dirichlet_energy(wave) == pytest.approx(direct, rel=1e-10)

    def test_quadratic_in_amplitude(self, nn_walk, small_wave):
        double = solve_spinwave(nn_walk, 8, 2, 2.0)
        assert dirichlet_energy(double) == pytest.approx(4 * dirichlet_energy(small_wave), rel=1e-7)

    def test_recurrent_energy_decreases(self, nn_walk):
        energies = [dirichlet_energy(solve_spinwave(nn_walk, n, 2, math.pi / 4))
                    for n in (16, 32, 64)]
        assert energies[0] > energies[1] > energies[2]
        # recurrent kernels lose a definite fraction per octave
        assert energies[2] / energies[1] < 0.85

    def test_transient_energy_floor(self):
        w = normalize(powerlaw_kernel(3.5, radius=32))
        cgrid = conductance_grid(w, 0.2, radius=48)
        energies = [dirichlet_energy(solve_spinwave(w, n, 2, math.pi / 4, cgrid=cgrid))
                    for n in (16, 32, 64)]
        assert energies[0] > energies[1] > energies[2]
        # transient kernels stabilize: the per-octave loss dries up
        assert energies[2] / energies[1] > 0.85


class TestRDelta:
    def test_inequality_tight(self, nn_walk):
        d = connectivity_bound(nn_walk, 0.2)
        sup = _sup_grid(d.radius)
        leak = d.c_bound - d.total
        for delta in (0.5, 0.05, 0.005):
            r = compute_R_delta([(0, 0)], delta, 0.2, nn_walk, 1.0)
            tail = float(d.grid[sup >= r].sum()) + leak
            assert tail <= delta / 2
            if r > 1:
                prev = float(d.grid[sup >= r - 1].sum()) + leak
                assert prev > delta / 2

    def test_monotone_in_delta(self, nn_walk):
        rs = [compute_R_delta([(0, 0)], d, 0.2, nn_walk, 1.0)
              for d in (0.5, 0.05, 0.005, 0.0005)]
        assert rs == sorted(rs)

    def test_support_radius_shifts_answer(self, nn_walk):
        near = compute_R_delta([(0, 0)], 0.01, 0.2, nn_walk, 1.0)
        far = compute_R_delta([(5, 0), (0, -5)], 0.01, 0.2, nn_walk, 1.0)
        assert far > near

    def test_rejects_bad_delta(self, nn_walk):
        with pytest.raises(ValueError):
            compute_R_delta([(0, 0)], 0.0, 0.2, nn_walk, 1.0)


class TestDeform:
    def test_empty_bonds_identity(self, small_wave):
        dw = deform(small_wave, [])
        assert np.array_equal(dw.values, small_wave.values)
        assert dw.witness == {}
        assert not dw.gated

    def test_single_bond_takes_minimum(self, small_wave):
        x, y = (3, 0), (4, 0)
        dw = deform(small_wave, [(x, y)])
        lo = min(small_wave.at(x), small_wave.at(y))
        assert dw.at(x) == lo
        assert dw.at(y) == lo
        assert dw.witness[x] == dw.witness[y]

    def test_chain_takes_global_minimum(self, small_wave):
        chain = [((3, 0), (4, 0)), ((4, 0), (5, 0)), ((5, 0), (6, 0))]
        dw = deform(small_wave, chain)
        lo = small_wave.at((6, 0))
        for site in [(3, 0), (4, 0), (5, 0), (6, 0)]:
            assert dw.at(site) == lo
            assert dw.witness[site] == (6, 0)
        assert dw.at((2, 0)) == small_wave.at((2, 0))

    def test_lexicographic_tie_break(self, small_wave):
        # (0,0) and (1,0) both sit in the inner box at the same value
        dw = deform(small_wave, [((0, 0), (1, 0))])
        assert dw.witness[(1, 0)] == (0, 0)

    def test_cluster_to_outside_zeroes(self, small_wave):
        m = small_wave.margin
        bonds = [((8, 0), (m + 1, 0))]
        dw = deform(small_wave, bonds)
        assert dw.at((8, 0)) == 0.0

    def test_cluster_reach(self):
        bonds = [((0, 0), (3, 1)), ((3, 1), (0, -6)), ((20, 20), (21, 20))]
        assert cluster_reach(bonds, [(0, 0)]) == 6
        assert cluster_reach([], [(2, 1)]) == 2

    def test_gate_zeroes_everything(self, small_wave):
        bonds = [((0, 0), (7, 0))]
        dw = deform(small_wave, bonds, r_delta=3)
        assert dw.gated
        assert not dw.values.any()
        ok = deform(small_wave, bonds, r_delta=7)
        assert not ok.gated

    def test_gate_frequency_bounded(self, nn_walk, small_wave):
        # union bound: P(r_A(V) > R(delta)) <= |V| * tail <= delta / (2 f_sup)
        delta, eps = 0.1, 0.2
        r_delta = compute_R_delta([(0, 0)], delta, eps, nn_walk, 1.0)
        j_grid = nn_walk.grid_values(4)
        rng = np.random.default_rng(23)
        trials, bad = 400, 0
        for _ in range(trials):
            bonds = sample_long_range_bonds(eps, j_grid, small_wave.margin, rng)
            if cluster_reach(bonds, [(0, 0)]) > r_delta:
                bad += 1
        bound = delta / 2
        assert bad / trials <= bound + 3 * math.sqrt(bound * (1 - bound) / trials)


class TestBondSampler:
    def test_bonds_are_valid(self, nn_walk):
        j_grid = nn_walk.grid_values(2)
        rng = np.random.default_rng(3)
        bonds = sample_long_range_bonds(0.4, j_grid, 10, rng)
        seen = set()
        for x, y in bonds:
            d = (y[0] - x[0], y[1] - x[1])
            assert j_grid[d[0] + 2, d[1] + 2] > 0
            assert max(abs(x[0]), abs(x[1])) <= 10
            assert max(abs(y[0]), abs(y[1])) <= 10
            key = frozenset((x, y))
            assert key not in seen
            seen.add(key)

    def test_count_statistics(self, nn_walk):
        # each of the 4 displacements contributes eps * 1/4 per eligible pair
        j_grid = nn_walk.grid_values(1)
        margin, eps = 12, 0.3
        side = 2 * margin + 1
        expected = eps * 0.5 * side * (side - 1)  # two representative shifts
        rng = np.random.default_rng(9)
        counts = [len(sample_long_range_bonds(eps, j_grid, margin, rng))
                  for _ in range(200)]
        sigma = math.sqrt(expected * (1 - eps * 0.25) / 200)
        assert abs(np.mean(counts) - expected) < 4 * sigma


class TestEntropyBound:
    def test_no_bonds_reduces_to_smooth_form(self, nn_walk, small_wave):
        j_grid = nn_walk.grid_values(small_wave.margin)
        est = entropy_bound(deform(small_wave, []), j_grid, c1=2.0)
        assert est.term_cluster_x == 0.0
        assert est.term_cluster_y == 0.0
        assert est.value == pytest.approx(est.term_smooth / 3, rel=1e-10)

    def test_brute_force_quadratic_form(self, nn_walk, small_wave):
        j_grid = nn_walk.grid_values(1)
        bonds = [((3, 0), (5, 0)), ((0, 4), (0, 6)), ((-4, -4), (-5, -4))]
        dw = deform(small_wave, bonds)
        est = entropy_bound(dw, j_grid, c1=1.0)
        m = small_wave.margin
        direct = 0.0
        n = small_wave.n
        for x1 in range(-n, n + 1):
            for x2 in range(-n, n + 1):
                for dx, dy in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
                    direct += 0.25 * (dw.at((x1, x2)) - dw.at((x1 + dx, x2 + dy))) ** 2
        assert est.value == pytest.approx(direct, rel=1e-9)

    def test_jensen_inequality(self, nn_walk, small_wave):
        j_grid = nn_walk.grid_values(4)
        rng = np.random.default_rng(17)
        for _ in range(5):
            bonds = sample_long_range_bonds(0.3, j_grid, small_wave.margin, rng)
            est = entropy_bound(deform(small_wave, bonds), j_grid, c1=1.5)
            assert est.value <= est.jensen_total + 1e-12

    def test_gated_wave_has_zero_entropy(self, nn_walk, small_wave):
        j_grid = nn_walk.grid_values(2)
        dw = deform(small_wave, [((0, 0), (7, 0))], r_delta=3)
        est = entropy_bound(dw, j_grid, c1=1.0)
        assert est.value == 0.0


class TestExpectedEntropy:
    def test_report_consistency(self, nn_walk):
        rep = expected_entropy(nn_walk, 0.2, 8, 2, math.pi / 4, 40, seed=5)
        assert rep.ci[0] <= rep.mean <= rep.ci[1]
        assert rep.mean >= 0.0
        assert rep.gated_fraction == 0.0
        # connection probabilities are dominated by d_eps
        assert rep.cluster_mean <= rep.cluster_comparison
        parts = rep.row().split()
        assert int(parts[0]) == 8
        assert float(parts[2]) == pytest.approx(rep.mean)

    def test_larger_box_smaller_entropy(self, nn_walk):
        small = expected_entropy(nn_walk, 0.2, 8, 2, math.pi / 4, 60, seed=1)
        big = expected_entropy(nn_walk, 0.2, 24, 2, math.pi / 4, 60, seed=2)
        assert big.mean < small.mean
        assert big.ci[1] < small.ci[0]
