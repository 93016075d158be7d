import itertools
import math

import pytest
from pydantic import ValidationError

from rlcpart.core.cpi import BatchedRlcVector
from rlcpart.core.errors import BalanceError, GraphFormatError, StreamOrderError
from rlcpart.core.extpq import ENTRY, ExtPqConfig
from rlcpart.core.generator import GenConfig, GraphModel, generate_stream, radius_for_average_degree
from rlcpart.core.graph_io import GraphHeader, NodeRecord, NodeStream, open_metis_stream, read_partition
from rlcpart.core.partitioner import (
    BackendConfig,
    BackendKind,
    FennelPartitioner,
    HashingStore,
    PartitionParams,
    PartitionState,
    create_partitioner,
    fennel_score,
    hashing_assign,
    kappa_modify,
    run_partition,
)

from .helpers import brute_force_cut, path_edges, random_edges, stream_from_edges, two_cliques

SMALL_PQ = BackendConfig(
    beta=7,
    delta=16,
    extpq=ExtPqConfig(internal_buffer_bytes=64 * ENTRY.size, block_bytes=8 * ENTRY.size),
)
INDEX_BACKENDS = [BackendKind.array, BackendKind.cpi, BackendKind.cpi_batch, BackendKind.extpq]


def _state(n=10, m=20, k=4, **params):
    return PartitionState(params=PartitionParams(k=k, **params), n=n, m=m)


def _assign(n, edges, backend=BackendKind.array, config=SMALL_PQ, **params):
    params.setdefault("k", 2)
    result = run_partition(
        stream_from_edges(n, edges), PartitionParams(**params), backend, config, keep_assignments=True
    )
    return result


# ----------------------------------------------------------------------
# scoring
# ----------------------------------------------------------------------
def test_alpha_and_score_example():
    state = _state()
    assert state.alpha == pytest.approx(1.26491, rel=1e-5)
    state.block_weights[1] = 4
    assert fennel_score(state, 1, 3) == pytest.approx(-0.79473, rel=1e-4)


def test_empty_block_scores_its_gain():
    state = _state()
    assert fennel_score(state, 0, 0) == 0
    assert fennel_score(state, 2, 5) == 5


def test_equal_blocks_score_equally():
    state = _state()
    state.block_weights[:] = [3, 3, 1, 0]
    assert fennel_score(state, 0, 2) == fennel_score(state, 1, 2)


def test_general_gamma_uses_power():
    state = _state(gamma=2.0)
    state.block_weights[0] = 9
    assert fennel_score(state, 0, 1) == pytest.approx(1 - state.alpha * 2.0 * 9)


def test_kappa_modify():
    assert kappa_modify(-2.0, 1, 1, 20) == pytest.approx(-0.1)
    assert kappa_modify(0.0, 1, 1, 20) == 0.0
    assert kappa_modify(3.0, 0, 1, 5) == 3.0
    assert kappa_modify(3.0, 1, 1, 5) == 15.0
    assert kappa_modify(3.0, 1, None, 5) == 3.0
    assert kappa_modify(-4.0, 2, 2, 1) == -4.0


def test_hashing_assign():
    assert hashing_assign(5, 4) == 1
    assert hashing_assign(0, 7) == 0
    for k in range(1, 257):
        sizes = [0] * k
        for v in range(10_000):
            b = hashing_assign(v, k)
            assert b == v % k
            sizes[b] += 1
        assert max(sizes) - min(sizes) <= 1


def test_params_derivations():
    params = PartitionParams(k=4)
    assert params.epsilon == 0.03 and params.gamma == 1.5 and params.kappa == 1.0
    assert params.l_max_for(100) == 26
    assert params.alpha_for(10, 20) == pytest.approx(20 * 2 / 10 ** 1.5)
    for n in (1, 7, 99, 1000):
        for k in (2, 3, 256):
            assert k * PartitionParams(k=k, epsilon=0).l_max_for(n) >= n


def test_params_validation():
    with pytest.raises(ValidationError):
        PartitionParams(k=1)
    with pytest.raises(ValidationError):
        PartitionParams(k=2, kappa=0.5)
    with pytest.raises(ValidationError):
        PartitionParams(k=2, epsilon=-0.1)


# ----------------------------------------------------------------------
# assignment
# ----------------------------------------------------------------------
def test_first_node_goes_to_block_zero():
    result = _assign(1, [], k=4)
    assert result.assignments == (0,)


def test_path_with_tight_balance():
    result = _assign(3, path_edges(3), k=2, epsilon=0.0)
    assert result.l_max == 2
    assert result.assignments == (0, 0, 1)
    assert result.edge_cut == 1


def test_two_cliques_hand_trace():
    for fast in (True, False):
        result = _assign(10, two_cliques(), k=2, epsilon=0.0, fast_scoring=fast)
        assert result.l_max == 5
        assert result.assignments == (0, 1, 0, 0, 0, 1, 1, 1, 1, 0)
        assert result.edge_cut == 8 == brute_force_cut(two_cliques(), result.assignments)
        assert result.block_weights == (5, 5)


def test_zero_gain_nodes_fill_lightest_block():
    result = _assign(6, [(4, 5)], k=3, epsilon=0.0)
    assert result.assignments == (0, 1, 2, 0, 1, 2)
    assert result.edge_cut == 1


def test_flat_penalty_sends_isolated_nodes_to_lightest_block():
    result = _assign(6, [], k=3, epsilon=0.0)
    assert result.assignments == (0, 1, 2, 0, 1, 2)
    assert result.edge_cut == 0


def test_linear_penalty_breaks_ties_on_weight():
    for fast in (True, False):
        result = _assign(4, [(2, 3)], k=2, epsilon=0.0, gamma=1.0, fast_scoring=fast)
        assert result.assignments == (0, 1, 0, 1)
        assert result.edge_cut == 1


def test_all_blocks_full_raises():
    header = GraphHeader(n=2, m=0)
    partitioner = create_partitioner(PartitionParams(k=2, epsilon=0.0), header, BackendKind.array)
    partitioner.state.block_weights[:] = [1, 1]
    with pytest.raises(BalanceError):
        partitioner.assign_node(NodeRecord(0, ()))


def test_out_of_order_node():
    partitioner = create_partitioner(PartitionParams(k=2), GraphHeader(n=3, m=0), BackendKind.cpi)
    with pytest.raises(StreamOrderError):
        partitioner.assign_node(NodeRecord(1, ()))


def test_kappa_one_is_identity():
    edges = random_edges(150, 0.05, seed=3)
    plain = _assign(150, edges, k=4)
    with_kappa = _assign(150, edges, k=4, kappa=1.0)
    assert plain.assignments == with_kappa.assignments


def test_fast_scoring_matches_all_blocks():
    for seed in range(6):
        edges = random_edges(120, 0.06, seed=seed)
        for k in (2, 5, 16):
            for kappa in (1.0, 20.0):
                fast = _assign(120, edges, k=k, kappa=kappa, fast_scoring=True)
                full = _assign(120, edges, k=k, kappa=kappa, fast_scoring=False)
                assert fast.assignments == full.assignments


def test_hashing_backend_has_no_index():
    edges = random_edges(100, 0.1, seed=1)
    result = _assign(100, edges, backend=BackendKind.hashing, k=4)
    assert result.index_bytes == 0
    assert result.assignments == tuple(v % 4 for v in range(100))
    assert result.edge_cut == brute_force_cut(edges, result.assignments)


def test_extpq_rejects_asymmetric_adjacency():
    records = [NodeRecord(0, (1,)), NodeRecord(1, ())]
    stream = NodeStream(GraphHeader(n=2, m=0), records)
    with pytest.raises(GraphFormatError, match="asymmetric"):
        run_partition(stream, PartitionParams(k=2), BackendKind.extpq)


def test_extpq_counts_each_edge_once():
    edges = random_edges(200, 0.05, seed=4)
    result = _assign(200, edges, backend=BackendKind.extpq, k=4)
    assert result.pq_inserted == result.pq_extracted == len(edges)


def test_cpi_batch_requires_beta():
    with pytest.raises(ValueError):
        _assign(3, path_edges(3), backend=BackendKind.cpi_batch, config=BackendConfig())


def test_partition_file_and_online_cut(tmp_path, cliques):
    out = tmp_path / "cliques.part"
    with open_metis_stream(cliques) as stream:
        result = run_partition(stream, PartitionParams(k=2, epsilon=0.0), BackendKind.cpi, output=out)
    blocks = read_partition(out, n=10, k=2)
    assert brute_force_cut(two_cliques(), blocks) == result.edge_cut
    assert sum(result.block_weights) == 10
    assert 0 <= result.rel_cut <= 1


def test_run_count_comes_from_the_stored_index():
    cfg = GenConfig(model=GraphModel.rgg, n=2000, rgg_radius=radius_for_average_degree(2000, 8), seed=6)
    params = PartitionParams(k=4)
    plain = run_partition(generate_stream(cfg), params, BackendKind.cpi, keep_assignments=True)
    batched = run_partition(
        generate_stream(cfg), params, BackendKind.cpi_batch, BackendConfig(beta=100), keep_assignments=True
    )
    assert batched.assignments == plain.assignments
    assert plain.run_count == len(list(itertools.groupby(plain.assignments)))

    shadow = BatchedRlcVector(100, k=4)
    for block in batched.assignments:
        shadow.append(block)
    assert batched.run_count == shadow.run_count()
    assert batched.run_count >= plain.run_count


def test_result_accounting():
    edges = random_edges(300, 0.03, seed=2)
    result = _assign(300, edges, backend=BackendKind.cpi, k=4)
    assert result.run_count >= 1
    assert result.peak_tracked_bytes >= result.index_bytes > 0
    assert result.elapsed_seconds >= 0
    assert result.rel_cut == pytest.approx(result.edge_cut / len(edges))


# ----------------------------------------------------------------------
# cross-backend equivalence
# ----------------------------------------------------------------------
def _graphs():
    graphs = []
    for seed in range(6):
        graphs.append((f"er-{seed}", 150, random_edges(150, 0.04, seed=seed)))
    for seed in range(6):
        cfg = GenConfig(model=GraphModel.rgg, n=600, rgg_radius=0.07, chunks=4, seed=seed)
        graphs.append((f"rgg-{seed}", cfg))
    for seed in range(6):
        cfg = GenConfig(model=GraphModel.ba, n=400, ba_degree=1 + seed % 3, chunks=3, seed=seed)
        graphs.append((f"ba-{seed}", cfg))
    graphs.append(("cliques", 10, two_cliques()))
    graphs.append(("path", 50, path_edges(50)))
    return graphs


def _stream(graph):
    if len(graph) == 2:
        return generate_stream(graph[1])
    _, n, edges = graph
    return stream_from_edges(n, edges)


def _edge_list(graph):
    if len(graph) == 3:
        return graph[2]
    return [(rec.id, w) for rec in generate_stream(graph[1]) for w in rec.neighbors if w > rec.id]


@pytest.mark.parametrize("graph", _graphs(), ids=lambda g: g[0])
def test_backends_produce_identical_partitions(graph):
    edges = _edge_list(graph)
    for k in (2, 4, 256):
        for kappa in (1.0, 20.0):
            params = PartitionParams(k=k, kappa=kappa)
            results = [
                run_partition(_stream(graph), params, backend, SMALL_PQ, keep_assignments=True)
                for backend in INDEX_BACKENDS
            ]
            reference = results[0]
            l_max = math.ceil(1.03 * reference.n / k)
            for result in results[1:]:
                assert result.assignments == reference.assignments
                assert result.edge_cut == reference.edge_cut
            assert reference.edge_cut == brute_force_cut(edges, reference.assignments)
            assert max(reference.block_weights) <= l_max


def test_kappa_lengthens_runs_on_rgg():
    cfg = GenConfig(model=GraphModel.rgg, n=5000, rgg_radius=radius_for_average_degree(5000, 10), seed=3)
    base = run_partition(generate_stream(cfg), PartitionParams(k=4, kappa=1.0), BackendKind.cpi)
    elongated = run_partition(generate_stream(cfg), PartitionParams(k=4, kappa=20.0), BackendKind.cpi)
    assert elongated.run_count <= base.run_count
    assert elongated.index_bytes <= base.index_bytes


@pytest.mark.slow
def test_fennel_beats_hashing_on_rgg():
    n = 10**5
    cfg = GenConfig(model=GraphModel.rgg, n=n, rgg_radius=radius_for_average_degree(n, 20), seed=42)
    fennel = run_partition(generate_stream(cfg), PartitionParams(k=4), BackendKind.cpi)
    hashing = run_partition(generate_stream(cfg), PartitionParams(k=4), BackendKind.hashing)
    assert fennel.rel_cut < 0.05
    assert 0.70 <= hashing.rel_cut <= 0.80
    assert max(fennel.block_weights) <= math.ceil(1.03 * n / 4)


def test_hashing_store_recomputes_neighbor_blocks():
    store = HashingStore(3)
    assert store.neighbor_blocks(NodeRecord(5, (0, 1, 4, 7))) == [0, 1, 1]
    assert store.size_in_bytes() == 0


def test_fennel_partitioner_is_default():
    partitioner = create_partitioner(PartitionParams(k=2), GraphHeader(n=2, m=1), BackendKind.cpi)
    assert isinstance(partitioner, FennelPartitioner)
