import math

import numpy as np
import pytest

from afibscreen.errors import NoEdges
from afibscreen.hvg import (
    HVGraph,
    build_hvg,
    disassortative_entropy,
    eccentricities,
    hvg_disassortative_entropy,
    hvg_radius,
    mixing_matrix,
    write_edge_list,
)
from oracles import hvg_edges_bruteforce, mixing_by_half_edges, radius_and_diameter


def test_ties_block_visibility():
    assert build_hvg([5, 5, 5, 5]).edge_set == {(0, 1), (1, 2), (2, 3)}


def test_valley_is_seen_over():
    assert build_hvg([3, 1, 2]).edge_set == {(0, 1), (1, 2), (0, 2)}


def test_middle_bar_blocks():
    assert build_hvg([1, 2, 3]).edge_set == {(0, 1), (1, 2)}


@pytest.mark.parametrize(
    "series",
    [[5, 5, 5, 5], [3, 1, 2], [1, 2, 3], [2, 1, 1, 2], [4, 1, 3, 1, 4], [1, 3, 3, 1, 3]],
)
def test_worked_examples_match_bruteforce(series):
    assert build_hvg(series).edge_set == hvg_edges_bruteforce(series)


def test_stack_build_matches_bruteforce_on_integer_series():
    # small integer alphabets force many ties
    rng = np.random.default_rng(11)
    for _ in range(300):
        x = rng.integers(0, 4, size=rng.integers(1, 30)).tolist()
        assert build_hvg(x).edge_set == hvg_edges_bruteforce(x)


def test_radius_examples():
    assert hvg_radius([800.0]) == 0
    assert hvg_radius([1, 2, 3]) == 1
    assert eccentricities(build_hvg([1, 2, 3])).tolist() == [2, 1, 2]
    assert hvg_radius([5, 5, 5, 5]) == 2


@pytest.mark.parametrize("n", [2, 3, 4, 7, 10, 40])
def test_monotone_series_give_paths(n):
    x = np.arange(n, dtype=float)
    G = build_hvg(x)
    assert G.edge_set == {(k, k + 1) for k in range(n - 1)}
    assert hvg_radius(x) == n // 2 == radius_and_diameter(n, G.edges)[0]
    assert hvg_radius(x[::-1]) == n // 2


def test_mixing_single_edge():
    assert mixing_matrix(build_hvg([1.0, 2.0])) == {(1, 1): 1.0}
    assert hvg_disassortative_entropy([1.0, 2.0]) == 0.0


def test_mixing_path_p3():
    e = mixing_matrix(build_hvg([1, 2, 3]))
    assert e == {(1, 2): 0.5, (2, 1): 0.5}
    assert hvg_disassortative_entropy([1, 2, 3]) == pytest.approx(math.log(0.5), abs=1e-15)


def test_mixing_matrix_symmetric_and_normalized():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.normal(size=rng.integers(2, 60))
        e = mixing_matrix(build_hvg(x))
        assert abs(sum(e.values()) - 1.0) <= 1e-12
        for (a, b), p in e.items():
            assert e[(b, a)] == p


def test_constant_forty_beats():
    # path P40: two (1,2) end edges and 37 (2,2) edges out of 39
    x = np.full(40, 800.0)
    assert hvg_radius(x) == 20
    expected = 2 * (2 / 78) * math.log(2 / 78) + (74 / 78) * math.log(74 / 78)
    assert hvg_disassortative_entropy(x) == pytest.approx(expected, abs=1e-12)


def test_no_edges():
    with pytest.raises(NoEdges):
        mixing_matrix(HVGraph.from_edges(1, []))


def test_f5_matches_half_edge_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.gamma(2.0, 100.0, size=rng.integers(2, 80))
        G = build_hvg(x)
        oracle = mixing_by_half_edges(G.vertex_count, G.edges)
        assert mixing_matrix(G) == pytest.approx(oracle, abs=1e-15)
        ent = sum(p * math.log(p) for p in oracle.values())
        assert disassortative_entropy(G) == pytest.approx(ent, abs=1e-12)


def test_edge_list_export(tmp_path):
    path = tmp_path / "edges.txt"
    write_edge_list(build_hvg([3, 1, 2]), path)
    assert path.read_text() == "1 2\n1 3\n2 3\n"
