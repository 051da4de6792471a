"""Tail bounds, empirical domination, random projection, random graphs."""

import math

import numpy as np
import pytest

from statforge import concentration as con
from statforge import distributions as d
from statforge.errors import DomainError
from statforge.rng import RandomStream, stream_split


class TestTailBoundFormulas:
    def test_sub_gaussian(self):
        b = con.tail_bound(con.SubGaussian(1.0), 2.0)
        assert b.raw == pytest.approx(2.0 * math.exp(-2.0), rel=1e-12)
        assert b.clamped == b.raw

    def test_markov(self):
        assert con.tail_bound(con.Markov(1.0), 10.0).raw == pytest.approx(0.1)

    def test_chebyshev(self):
        assert con.tail_bound(con.Chebyshev(4.0), 4.0).raw == pytest.approx(0.25)

    def test_chernoff_binomial(self):
        # mean count 300, relative deviation 0.1
        b = con.tail_bound(con.ChernoffBinomial(300.0), 30.0)
        assert b.raw == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)

    def test_chi_squared_relative_branches(self):
        small = con.tail_bound(con.ChiSquaredRelative(8), 0.5)
        assert small.raw == pytest.approx(2.0 * math.exp(-0.25), rel=1e-12)
        assert small.clamped == 1.0
        large = con.tail_bound(con.ChiSquaredRelative(8), 2.0)
        assert large.raw == pytest.approx(2.0 * math.exp(-2.0), rel=1e-12)

    def test_sub_exponential_regime_split(self):
        kind = con.SubExponential(nu=2.0, beta=1.0)  # split at nu^2/beta = 4
        below = con.tail_bound(kind, 3.999).raw
        above = con.tail_bound(kind, 4.001).raw
        assert below == pytest.approx(2.0 * math.exp(-3.999**2 / 8.0), rel=1e-9)
        assert above == pytest.approx(2.0 * math.exp(-4.001 / 2.0), rel=1e-9)

    def test_nonpositive_deviation_rejected(self):
        with pytest.raises(DomainError):
            con.tail_bound(con.SubGaussian(1.0), 0.0)
        with pytest.raises(DomainError):
            con.tail_bound(con.Markov(1.0), -1.0)


class TestEmpiricalTail:
    def test_zero_deviation_has_frequency_one(self, stream):
        res = con.empirical_tail(d.Normal(0.0, 1.0), 0.0, [0.0, 1.0], 10_000, stream)
        assert res.frequency[0] == 1.0

    def test_normal_two_sigma_matches_cdf_oracle(self, stream):
        res = con.empirical_tail(d.Normal(0.0, 1.0), 0.0, [2.0], 1_000_000, stream)
        expected = 2.0 * (1.0 - d.dist_cdf(d.Normal(0.0, 1.0), 2.0))
        assert res.frequency[0] == pytest.approx(expected, abs=4.0 * res.standard_error[0])

    def test_sum_of_specs(self, stream):
        # sum of two unit uniforms has mean 1
        res = con.empirical_tail([d.Uniform01(), d.Uniform01()], 1.0, [0.9], 200_000, stream)
        assert res.frequency[0] == pytest.approx(0.01, abs=0.002)

    @pytest.mark.parametrize("spec,center,kind", [
        (d.Normal(0.0, 1.0), 0.0, con.SubGaussian(1.0)),
        (d.Uniform01(), 0.5, con.SubGaussian(1.0)),  # bounded on [0,1]
    ])
    def test_domination(self, spec, center, kind, stream):
        grid = np.linspace(0.25, 3.0, 12)
        res = con.empirical_tail(spec, center, grid, 200_000, stream)
        for freq, se, t in zip(res.frequency, res.standard_error, grid):
            assert freq <= con.tail_bound(kind, t).clamped + 3.0 * se


class TestJL:
    def test_target_dim_examples(self):
        assert con.jl_target_dim(2, 0.5, 2.0 / math.e) == 32
        assert con.jl_target_dim(100, 0.25, 0.05) == 1562
        assert con.jl_target_dim(2, 0.5, 1.0 - 1e-12) == 23

    def test_target_dim_monotone_on_lattice(self):
        ns = [2, 10, 100, 1000]
        epsilons = [0.1, 0.25, 0.5, 0.9]
        deltas = [0.01, 0.05, 0.2, 0.9]
        for delta in deltas:
            for eps in epsilons:
                ms = [con.jl_target_dim(n, eps, delta) for n in ns]
                assert ms == sorted(ms)
            for n in ns:
                by_eps = [con.jl_target_dim(n, e, delta) for e in epsilons]
                assert by_eps == sorted(by_eps, reverse=True)
        for n in ns:
            for eps in epsilons:
                by_delta = [con.jl_target_dim(n, eps, dl) for dl in deltas]
                assert by_delta == sorted(by_delta, reverse=True)

    def test_zero_maps_to_zero(self, stream):
        points = np.zeros((3, 20))
        assert np.all(con.jl_project(points, 5, stream) == 0.0)

    def test_projection_deterministic_for_fixed_stream(self):
        pts = RandomStream(1).normals(40).reshape(2, 20)
        a = con.jl_project(pts, 6, RandomStream(9, 3))
        b = con.jl_project(pts, 6, RandomStream(9, 3))
        assert np.array_equal(a, b)

    def test_unit_norm_preserved_on_average(self):
        # ||F(x)||^2 is a chi-squared with m dof scaled by 1/m: mean 1
        root = RandomStream(100)
        m, p, trials = 16, 8, 10_000
        x = np.zeros((1, p))
        x[0, 0] = 1.0
        total = 0.0
        for r in range(trials):
            y = con.jl_project(x, m, stream_split(root, r))
            total += float((y ** 2).sum())
        assert total / trials == pytest.approx(1.0, abs=0.05)

    def test_identical_points_are_vacuous(self, stream):
        cfg = con.JLConfig(n_points=2, ambient_dim=4, epsilon=0.5, delta=0.1)
        pts = np.ones((2, 4))
        res = con.jl_trial(cfg, stream, points=pts)
        assert res.success and res.skipped_pairs == 1

    def test_loose_distortion_with_large_m_succeeds(self, stream):
        cfg = con.JLConfig(n_points=4, ambient_dim=32, epsilon=0.99, delta=1e-6)
        assert con.jl_trial(cfg, stream).success

    def test_success_rate_at_theorem_dimension(self):
        cfg = con.JLConfig(n_points=20, ambient_dim=100, epsilon=0.4, delta=0.1)
        root = RandomStream(11)
        wins = sum(con.jl_trial(cfg, stream_split(root, r)).success for r in range(50))
        assert wins / 50 >= 0.9


class TestErdosRenyi:
    def test_extreme_probabilities(self, stream):
        empty = con.er_sample(10, 0.0, stream)
        assert empty.edges.shape[0] == 0
        full = con.er_sample(10, 1.0, stream)
        assert full.edges.shape[0] == 45

    def test_mean_edge_count(self):
        root = RandomStream(55)
        n, p, graphs = 100, 0.1, 10_000
        pairs = n * (n - 1) // 2
        counts = [con.er_sample(n, p, stream_split(root, r)).edges.shape[0]
                  for r in range(graphs)]
        se = math.sqrt(pairs * p * (1 - p) / graphs)
        assert np.mean(counts) == pytest.approx(pairs * p, abs=4.0 * se)

    def test_metrics_on_complete_graph(self, stream):
        g = con.er_sample(12, 1.0, stream)
        m = con.er_metrics(g)
        assert m.is_connected
        assert np.all(m.degree_sequence == 11)
        assert m.mean_degree == 11.0

    def test_empty_graph_disconnected(self, stream):
        m = con.er_metrics(con.er_sample(5, 0.0, stream))
        assert not m.is_connected
        assert m.edge_count == 0

    def test_two_components_detected(self):
        g = con.ErdosRenyiGraph(4, 0.5, np.array([[0, 1], [2, 3]]))
        assert not con.er_metrics(g).is_connected

    def test_degree_law_binomial(self):
        # one vertex degree over many graphs behaves like Bin(p; N-1)
        root = RandomStream(77)
        n, p, graphs = 30, 0.2, 4000
        degs = np.array([con.er_metrics(con.er_sample(n, p, stream_split(root, r))).degree_sequence[0]
                         for r in range(graphs)])
        mean, var = (n - 1) * p, (n - 1) * p * (1 - p)
        assert degs.mean() == pytest.approx(mean, abs=4.0 * math.sqrt(var / graphs))
        assert degs.var() == pytest.approx(var, rel=0.15)

    def test_almost_regularity(self):
        eps, delta, n = 0.3, 0.1, 2000
        c = con.regular_degree_constant(eps, delta)
        degree = c * math.log(n)
        p = min(1.0, degree / (n - 1))
        d_target = (n - 1) * p
        root = RandomStream(303)
        hits = 0
        graphs = 100
        for r in range(graphs):
            g = con.er_sample(n, p, stream_split(root, r))
            degs = con.er_metrics(g).degree_sequence
            hits += bool(np.all(np.abs(degs - d_target) <= eps * d_target))
        assert hits / graphs >= 1.0 - delta

    def test_csv_round_trip(self, tmp_path, stream):
        g = con.er_sample(25, 0.2, stream)
        path = tmp_path / "graph.csv"
        con.write_graph_csv(g, path)
        back = con.read_graph_csv(path)
        assert back.n_vertices == g.n_vertices
        assert back.p == g.p
        assert np.array_equal(back.edges, g.edges)

    def test_validation(self, stream):
        with pytest.raises(DomainError):
            con.er_sample(1, 0.5, stream)
        with pytest.raises(DomainError):
            con.er_sample(5, 1.5, stream)
        with pytest.raises(DomainError):
            con.ErdosRenyiGraph(3, 0.1, np.array([[1, 1]]))


def test_point_cloud_csv(tmp_path):
    pts = RandomStream(8).normals(12).reshape(4, 3)
    path = tmp_path / "points.csv"
    np.savetxt(path, pts, delimiter=",")
    loaded = con.load_points_csv(path)
    assert np.allclose(loaded, pts)
