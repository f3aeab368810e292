"""Ensemble community detection.

Two ensemble pipelines over a pool of base disjoint clusterings:

* :func:`ensemblecd.endisco` re-clusters a vertex-similarity matrix built
  from posterior community-membership profiles (disjoint output);
* :func:`ensemblecd.medoc` meta-clusters the base communities themselves
  and reads disjoint, overlapping, or fuzzy structure off an association
  matrix.

Plus base detectors, a consensus-clustering baseline, agreement metrics,
a planted benchmark generator, base-solution selection strategies, and
post-hoc analyses.
"""

from .graph import (
    Graph,
    GraphError,
    VertexOrdering,
    bfs_distances,
    hop_matrix,
    induced_subgraph,
    load_edge_list,
    random_ordering,
    save_edge_list,
)
from .structures import (
    Cover,
    FuzzyAssignment,
    Partition,
    StructureError,
    load_cover,
    load_fuzzy,
    load_partition,
    one_hot,
    partition_to_cover,
    save_cover,
    save_fuzzy,
    save_partition,
)
from .detectors import (
    DETECTORS,
    BaseDetector,
    get_detectors,
    greedy_cnm,
    import_partition,
    label_propagation,
    louvain,
    modularity,
    walktrap,
)
from .ensemble import (
    BaseSolution,
    BaseSolutionSet,
    consensus_clustering,
    cooccurrence,
    default_k,
    generate_base_solutions,
)
from .endisco import (
    build_ensemble_matrix,
    community_centroid,
    endisco,
    endisco_run,
    ensemble_graph,
    feature_profiles,
    involvement_idc,
    involvement_rcc,
    posterior,
)
from .medoc import (
    assoc_simple,
    assoc_weighted,
    association_matrix,
    auto_threshold_cover,
    average_row_similarity,
    build_meta_graph,
    community_probability,
    extract_disjoint,
    extract_fuzzy,
    match_ap,
    match_jc,
    medoc,
    medoc_run,
    meta_cluster,
)
from .metrics import ari, fuzzy_rand, nmi, omega, onmi
from .benchgen import (
    BenchConfig,
    BenchError,
    gen_disjoint,
    gen_fuzzy,
    gen_overlapping,
    realized_stats,
)
from .selection import (
    SolutionScoreboard,
    build_scoreboard,
    select_combined,
    select_diversity,
    select_quality,
    select_solutions,
    select_vrrw,
    vrrw_occupancy,
)
from .analysis import (
    DegeneracySummary,
    ShellProfile,
    core_periphery_profile,
    degeneracy_report,
    endisco_runner,
    k_shell_decomposition,
    medoc_runner,
    runtime_ratio,
    stable_communities,
)

__version__ = "0.1.0"
