"""Probabilistic kernel SVM for binary classification of Gaussian points.

A Gaussian point is a mean vector with a covariance describing the
uncertainty of that measurement. Points are compared with the expected RBF
kernel under a shared-noise coupling, and a standard soft-margin dual SVM is
trained on the resulting Gram matrix.
"""

from .dataset import LabeledDataset, make_paper_dataset, read_dataset, write_dataset
from .errors import (
    DimensionMismatch,
    EmptyDataset,
    InvalidLabel,
    NoCrossings,
    NotPSD,
    NotSPD,
    ParseError,
    PkSVMError,
)
from .evaluation import mean_boundary_radius, radial_zero_crossing, score_grid, training_accuracy
from .kernel import GaussianPoint, KernelParams, gram_matrix, monte_carlo_kernel, pk_kernel, rbf_kernel
from .modelfile import load_model, save_model
from .solver import SolverParams, TrainedModel, classify, compute_bias, decision_score, smo_solve, train

__version__ = "0.1.0"
