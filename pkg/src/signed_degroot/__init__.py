"""Opinion dynamics on signed multigraphs with follow and deviate relations."""
from .analysis import (ClassificationResult, BipartitionCertificate, classify, opposition_bipartition,
                       period, reverse_opposition_bipartition, strongly_connected_components,
                       structure_partition, verify_k_partition)
from .dynamics import LimitReport, Trajectory, simulate, step, step_continuous, step_discrete
from .equilibria import (brute_force_fixed_points, build_multipolarization, build_oscillation_pair,
                         build_polarization, consensus_fixed_points, is_fixed_point, wisdom_verdict)
from .graph import SignedMultigraph, in_group, is_sslss, out_group, out_weight, validate
from .scenario import Scenario, load_preset, load_scenario
from .spectral import affine_representation, eigen_symmetric, gauge_matrix, influence_report, spectral_radius
from .spectrum import DeviationSpec, DiscreteOrdered, Interval, fixed_points

__version__ = "0.1.0"
