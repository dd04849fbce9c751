"""Graph core: Laplacians, spectra, certificates, serialization."""
import numpy as np
import pytest

from flocklab import generators
from flocklab.errors import (
    DimensionMismatchError,
    NonSymmetricError,
    PreconditionViolatedError,
)
from flocklab.graphs import (
    ConnectivityCertificate,
    PeriodicTemporal,
    TemporalSchedule,
    WeightedDigraph,
    check_assumption_b,
    eigenvalue_comparison_check,
    fiedler_value,
    graph_from_csv,
    graph_from_json,
    graph_to_csv,
    graph_to_json,
    is_complete,
    is_neighbor_connected,
    is_strongly_connected,
    laplacian,
    quadratic_form,
    symmetric_spectrum,
    zero_eigenvalue_multiplicity,
)


def complete_graph(n, weight=1.0):
    w = np.full((n, n), weight)
    np.fill_diagonal(w, 0.0)
    return WeightedDigraph(w)


def random_graph(rng, n, density=0.5, symmetric=False, lo=0.0, hi=1.0):
    w = rng.uniform(lo, hi, size=(n, n)) * (rng.random((n, n)) < density)
    if symmetric:
        w = np.triu(w, 1)
        w = w + w.T
    np.fill_diagonal(w, 0.0)
    return WeightedDigraph(w)


class TestLaplacian:
    def test_two_node_symmetric(self):
        g = WeightedDigraph(np.array([[0.0, 3.0], [3.0, 0.0]]))
        assert np.array_equal(laplacian(g).entries, [[3.0, -3.0], [-3.0, 3.0]])

    def test_one_leader_degrees(self):
        lap = laplacian(generators.one_leader(5, 1.0)).entries
        assert np.array_equal(np.diag(lap), [4.0, 1.0, 1.0, 1.0, 1.0])
        assert np.array_equal(lap - np.diag(np.diag(lap)),
                              -generators.one_leader(5, 1.0).weights)

    def test_empty_graph(self):
        g = WeightedDigraph(np.zeros((3, 3)))
        assert np.array_equal(laplacian(g).entries, np.zeros((3, 3)))

    def test_row_sums_vanish_on_random_digraphs(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            g = random_graph(rng, int(rng.integers(2, 9)))
            rows = laplacian(g).entries.sum(axis=1)
            assert np.max(np.abs(rows)) <= 1e-12

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            WeightedDigraph(np.eye(3))


class TestSpectrum:
    def test_complete_graph_spectrum(self):
        spec = symmetric_spectrum(laplacian(complete_graph(7)))
        assert abs(spec[0]) <= 1e-8
        assert np.allclose(spec[1:], 7.0, atol=1e-9)

    def test_two_disjoint_edges(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        spec = symmetric_spectrum(laplacian(WeightedDigraph(w)))
        assert np.allclose(spec, [0.0, 0.0, 2.0, 2.0], atol=1e-9)
        assert zero_eigenvalue_multiplicity(spec) == 2

    def test_one_leader_star_closed_form(self):
        # Star on N vertices: eigenvalues {0, 1 x (N-2), N}
        spec = symmetric_spectrum(laplacian(generators.one_leader(5, 1.0)))
        assert np.allclose(spec, [0.0, 1.0, 1.0, 1.0, 5.0], atol=1e-9)

    def test_matches_library_eigensolver(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            g = random_graph(rng, int(rng.integers(2, 10)), symmetric=True)
            ours = symmetric_spectrum(laplacian(g))
            ref = np.sort(np.linalg.eigvalsh(laplacian(g).entries))
            assert np.allclose(ours, ref, atol=1e-9 * max(1.0, ref[-1]))

    def test_nonnegative_and_contains_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            g = random_graph(rng, int(rng.integers(2, 9)), symmetric=True)
            spec = symmetric_spectrum(laplacian(g))
            assert spec[0] >= -1e-9
            assert zero_eigenvalue_multiplicity(spec) >= 1

    def test_asymmetric_rejected(self):
        g = WeightedDigraph(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(NonSymmetricError):
            symmetric_spectrum(laplacian(g))

    def test_zero_multiplicity_counts_components(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            sizes = rng.integers(1, 4, size=int(rng.integers(1, 4)))
            blocks = []
            for s in sizes:
                w = rng.uniform(0.5, 2.0, size=(s, s))
                w = np.triu(w, 1)
                blocks.append(w + w.T)
            n = int(sizes.sum())
            w = np.zeros((n, n))
            at = 0
            for b in blocks:
                w[at:at + b.shape[0], at:at + b.shape[0]] = b
                at += b.shape[0]
            spec = symmetric_spectrum(laplacian(WeightedDigraph(w)))
            # Singleton blocks are their own components
            assert zero_eigenvalue_multiplicity(spec) == len(sizes)


class TestFiedler:
    def test_scaled_complete_graph(self):
        alpha = 1.0 / 60.0
        assert fiedler_value(complete_graph(60, alpha)) == pytest.approx(60 * alpha, rel=1e-9)

    def test_disconnected_graph(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        assert fiedler_value(WeightedDigraph(w)) == pytest.approx(0.0, abs=1e-9)

    def test_path_three(self):
        w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        expected = np.sort(np.linalg.eigvalsh(laplacian(WeightedDigraph(w)).entries))[1]
        assert fiedler_value(WeightedDigraph(w)) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(1.0, abs=1e-12)

    def test_asymmetric_rejected(self):
        g = WeightedDigraph(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(NonSymmetricError):
            fiedler_value(g)


class TestQuadraticForm:
    def test_ones_vector_in_kernel(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            g = random_graph(rng, 6, symmetric=True)
            assert abs(quadratic_form(laplacian(g), np.ones(6))) <= 1e-12

    def test_single_edge(self):
        g = WeightedDigraph(np.array([[0.0, 2.5], [2.5, 0.0]]))
        assert quadratic_form(laplacian(g), np.array([1.0, 0.0])) == pytest.approx(2.5)

    def test_matches_edge_sum(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            g = random_graph(rng, 6, symmetric=True)
            x = rng.normal(size=6)
            edge_sum = 0.5 * sum(
                g.weights[i, j] * (x[i] - x[j]) ** 2
                for i in range(6) for j in range(6)
            )
            got = quadratic_form(laplacian(g), x)
            assert got == pytest.approx(edge_sum, rel=1e-10, abs=1e-12)

    def test_dimension_mismatch(self):
        g = complete_graph(3)
        with pytest.raises(DimensionMismatchError):
            quadratic_form(laplacian(g), np.ones(4))


class TestEigenvalueComparison:
    def test_homogeneous_scaling(self):
        q = complete_graph(4)
        p = complete_graph(4, 0.5)
        res = eigenvalue_comparison_check(p, q)
        assert res.ok
        assert np.allclose(res.spectrum_p, 0.5 * res.spectrum_q, atol=1e-9)

    def test_identity_case(self):
        g = complete_graph(5, 0.7)
        res = eigenvalue_comparison_check(g, g)
        assert res.ok
        assert np.allclose(res.spectrum_p, res.spectrum_q, atol=1e-9)

    def test_random_nested_graphs(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            q = random_graph(rng, n, symmetric=True)
            frac = rng.uniform(0.0, 1.0, size=(n, n))
            frac = np.triu(frac, 1)
            frac = frac + frac.T
            p = WeightedDigraph(q.weights * frac)
            res = eigenvalue_comparison_check(p, q)
            assert res.ok, f"ordering failed at index {res.failed_index}"

    def test_precondition_enforced(self):
        p = complete_graph(3, 2.0)
        q = complete_graph(3, 1.0)
        with pytest.raises(PreconditionViolatedError):
            eigenvalue_comparison_check(p, q)


def brute_force_neighbor_connected(g):
    """Straight re-statement of the pairwise condition, O(N^3)."""
    mask = g.edge_mask()
    n = g.n_vertices
    for i in range(n):
        for j in range(i + 1, n):
            if mask[i, j] or mask[j, i]:
                continue
            if any(mask[i, k] and mask[k, i] and mask[j, k] and mask[k, j]
                   for k in range(n)):
                continue
            return False, (i, j)
    return True, None


class TestNeighborConnected:
    def test_one_leader_via_hub(self):
        cert = is_neighbor_connected(generators.one_leader(6, 1.0))
        assert cert.holds and cert.derived_rate == 1.0

    def test_three_group_directed(self):
        cert = is_neighbor_connected(generators.three_group_directed((5, 3, 2)))
        assert cert.holds

    def test_directed_four_cycle_fails(self):
        w = np.zeros((4, 4))
        for i in range(4):
            w[i, (i + 1) % 4] = 1.0
        cert = is_neighbor_connected(WeightedDigraph(w))
        assert not cert.holds
        assert cert.witness == (0, 2)

    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(rng.integers(2, 7))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.9)))
            expected, witness = brute_force_neighbor_connected(g)
            cert = is_neighbor_connected(g)
            assert cert.holds == expected
            if not expected:
                assert cert.witness == witness


def brute_force_reachable(mask, start):
    n = mask.shape[0]
    reach = np.zeros(n, dtype=bool)
    reach[start] = True
    for _ in range(n):
        reach = reach | (mask.T @ reach.astype(float) > 0)
    return reach


class TestStronglyConnected:
    def test_complete(self):
        assert is_strongly_connected(complete_graph(3)).holds

    def test_single_directed_edge(self):
        g = WeightedDigraph(np.array([[0.0, 1.0], [0.0, 0.0]]))
        cert = is_strongly_connected(g)
        assert not cert.holds and cert.witness is not None

    def test_three_group_cycle(self):
        assert is_strongly_connected(generators.three_group_directed((2, 3, 1))).holds

    def test_agrees_with_matrix_power_reachability(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            g = random_graph(rng, n, density=float(rng.uniform(0.1, 0.9)))
            mask = g.edge_mask()
            expected = all(
                brute_force_reachable(mask, s).all() for s in range(n)
            )
            assert is_strongly_connected(g).holds == expected


class TestAssumptionB:
    def test_regular_circulant_holds(self):
        g = generators.circulant_regular(60, 38, 1.0)
        cert = check_assumption_b(g, gamma_m=1.0, epsilon=0.0, n=101.0)
        assert cert.holds
        assert cert.neighbor_range == (38, 38)

    def test_single_low_weight_fails(self):
        g = generators.circulant_regular(60, 38, 1.0)
        w = g.weights.copy()
        w[0, 1] = 0.5
        w[1, 0] = 0.5
        cert = check_assumption_b(WeightedDigraph(w), 1.0, 0.0, 101.0)
        assert not cert.holds
        assert cert.witness == (0, 1)

    def test_perturbed_overlapping_cliques(self):
        g = generators.overlapping_cliques(60, 30, 45, 1.0)
        pert = generators.perturb_weights(g, gamma_m=1.0, epsilon=1.0 / 365.0, seed=11)
        cert = check_assumption_b(pert, 1.0, 1.0 / 365.0, 365.0)
        assert cert.holds
        assert cert.neighbor_range == (30, 45)

    def test_parameter_validation(self):
        g = generators.circulant_regular(6, 4, 1.0)
        with pytest.raises(PreconditionViolatedError):
            check_assumption_b(g, gamma_m=1.0, epsilon=0.5, n=3.0)  # n*eps > gamma_m


class TestCompleteCertificate:
    def test_complete_with_floor(self):
        cert = is_complete(complete_graph(5, 2.0), weight_floor=2.0)
        assert cert.holds and cert.derived_rate == pytest.approx(10.0)

    def test_missing_edge(self):
        w = np.full((3, 3), 1.0)
        np.fill_diagonal(w, 0.0)
        w[0, 1] = 0.0
        cert = is_complete(WeightedDigraph(w))
        assert not cert.holds and cert.witness == (0, 1)


class TestTemporalGraph:
    def test_schedule_lookup(self):
        g0, g1 = complete_graph(3, 1.0), complete_graph(3, 2.0)
        tg = TemporalSchedule([(0.0, g0), (1.0, g1)])
        assert tg.graph_at(0.0) is g0
        assert tg.graph_at(0.999) is g0
        assert tg.graph_at(1.0) is g1
        assert tg.graph_at(5.0) is g1

    def test_schedule_validation(self):
        g = complete_graph(2)
        with pytest.raises(PreconditionViolatedError):
            TemporalSchedule([(1.0, g)])
        with pytest.raises(PreconditionViolatedError):
            TemporalSchedule([(0.0, g), (0.0, g)])

    def test_periodic_pieces(self):
        built = []

        def build(k):
            built.append(k)
            return complete_graph(2, float(k + 1))

        tg = PeriodicTemporal(0.5, build)
        assert tg.graph_at(0.0).weights[0, 1] == 1.0
        assert tg.graph_at(0.49).weights[0, 1] == 1.0
        assert tg.graph_at(0.5).weights[0, 1] == 2.0
        assert tg.graph_at(1.7).weights[0, 1] == 4.0
        # piece cache avoids rebuilding within a piece
        assert built == [0, 1, 3]


class TestSerialization:
    def test_json_round_trip(self):
        rng = np.random.default_rng(9)
        g = random_graph(rng, 5)
        back = graph_from_json(graph_to_json(g))
        assert np.array_equal(back.weights, g.weights)

    def test_csv_round_trip(self):
        rng = np.random.default_rng(10)
        g = random_graph(rng, 6, density=0.4)
        back = graph_from_csv(graph_to_csv(g), n_vertices=6)
        assert np.array_equal(back.weights, g.weights)

    def test_csv_header_enforced(self):
        with pytest.raises(PreconditionViolatedError):
            graph_from_csv("a,b,c\n0,1,1.0\n")


def test_certificate_requires_witness_when_failing():
    # Structural sanity on every certificate producer
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = random_graph(rng, int(rng.integers(2, 7)), density=0.3)
        for cert in (is_neighbor_connected(g), is_strongly_connected(g)):
            assert isinstance(cert, ConnectivityCertificate)
            if not cert.holds:
                assert cert.witness is not None
