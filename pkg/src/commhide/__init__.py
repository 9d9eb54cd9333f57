"""Evolutionary link-rewiring attacks on community detection.

The package finds small sets of link additions and deletions that disrupt a
network's community structure at three scales: the whole network, one target
community, or one target node.  Candidate rewirings evolve under a genetic
algorithm whose fitness rewards mixing of the detected communities while an
exponential attenuation term keeps the rewiring budget small.
"""

from .baselines import (attack_AB, attack_AD, attack_AQ, attack_AS, attack_Dr,
                        attack_Dw, attack_random)
from .detection import (Partition, greedy_modularity, label_propagation,
                        louvain, modularity)
from .errors import (CommhideError, ConfigError, GraphFormatError,
                     InfeasibleAttackError, InvalidPerturbationError)
from .evolve import (AttackReport, AttackScale, Chromosome, GAConfig,
                     run_epa)
from .experiment import (ExperimentConfig, ResultRow, emit_report,
                         parse_config, run_experiment)
from .graph import (Graph, LinkIndexSpace, Perturbation, all_pairs_distances,
                    apply_perturbation, edge_betweenness,
                    generate_planted_partition, index_bijection,
                    load_edge_list, load_gml, load_graph)
from .metrics import (ari, attenuation, confusion, deception_score,
                      degree_distance, global_entropies, nmi,
                      target_confusion, target_entropies)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
