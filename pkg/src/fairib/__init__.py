"""Fair compressed representations under equalized odds.

Learns an encoder Q(u|x) minimizing alpha*I(X;U) + beta*I(A;U|Y) - I(U;Y)
by alternating updates, then predicts Y from U with a Bayes decision rule.
"""

from .data import SYNTHETIC_V1, GeneratorSpec, SampleTable, empirical_joint, sample, spec_to_joint
from .distributions import Alphabet, Decoder, Encoder, JointAXY, Marginal, conditional, make_joint, marginal
from .information import (
    conditional_mutual_information,
    entropy,
    kl_divergence,
    lagrangian,
    mutual_information,
)
from .predictor import DecisionRule, LossMatrix, bayes_risk, bayes_rule, equalized_odds_gap
from .solver import FitResult, SolverParams, SolverState, fit, lagrangian_gradient

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Decoder", "DecisionRule", "Encoder", "FitResult", "GeneratorSpec",
    "JointAXY", "LossMatrix", "Marginal", "SYNTHETIC_V1", "SampleTable", "SolverParams",
    "SolverState", "bayes_risk", "bayes_rule", "conditional", "conditional_mutual_information",
    "empirical_joint", "entropy", "equalized_odds_gap", "fit", "kl_divergence", "lagrangian",
    "lagrangian_gradient", "make_joint", "marginal", "mutual_information", "sample",
    "spec_to_joint",
]
