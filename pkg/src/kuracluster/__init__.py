"""Cluster synchronization in Kuramoto networks with adaptive (plastic) coupling.

Simulation of the network, checks of the existence and stability
conditions of a prescribed multi-cluster partition, and diagnostics of the
convergence to the cluster-synchronous manifold.
"""

from kuracluster.conditions import ConditionReport, check_A1, check_A2, check_A3, check_A4, check_all
from kuracluster.graph import (ClusterStructure, Digraph, Partition, build_digraph,
                               cluster_cardinalities, complete_digraph, make_partition,
                               residual_matrices)
from kuracluster.integrate import Trajectory, integrate, integrate_error, rk4
from kuracluster.model import (ErrorState, NetworkSpec, SimState, from_error, rhs_error, rhs_full,
                               to_error)
from kuracluster.rules import LearningRule, custom_fourier, hebbian_cos, neg_cos, shifted_cos
from kuracluster.spectral import Spectrum, eig, is_hurwitz

__version__ = "0.1.0"

