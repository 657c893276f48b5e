"""All-distances sketches with HIP estimators, distinct counters and Morris counters."""

from .ads import (
    Ads,
    AdsEntry,
    AdsSet,
    Direction,
    Flavor,
    ads_insert,
    build_local_updates,
    build_pruned_dijkstra,
    read_snapshot,
    stream_ads_first,
    stream_ads_recent,
    write_snapshot,
)
from .counter import MorrisCounter, morris_add, morris_estimate, morris_merge
from .distinct import BottomKHipCounter, HllHipCounter, hll_baseline_estimate
from .estimate import (
    HipWeights,
    Kernel,
    PermutationEstimator,
    distance_weight_compress,
    estimate_centrality,
    estimate_neighborhood,
    estimate_qg,
    hip_weights,
    permutation_estimate,
    size_estimate,
)
from .graph import Graph, dijkstra, read_edge_list
from .minhash import (
    CardinalityEstimate,
    MinHashSketch,
    estimate_bottomk,
    estimate_kmins,
    estimate_kpartition,
    mh_from_ads,
    mh_merge,
    mh_update,
)
from .rank import (
    BaseBRank,
    InvalidInput,
    InvalidParameter,
    RankScheme,
    base_b_rank,
    bucket_of,
    permutation_ranks,
    rank_of,
    weighted_rank,
)
from .weighted import build_weighted_ads, hip_weighted_estimate

__version__ = "0.1.0"
