"""Adversarial Shapley value experience replay for task-free continual learning."""

from .harness import ExperimentConfig, aggregate_runs, run_experiment, write_results
from .knn_shapley import (
    ShapleyMatrix,
    exact_shapley_bruteforce,
    knn_sv_matrix,
    knn_sv_single,
    knn_utility,
)
from .learner import (
    ClassifierParams,
    RetrievalStrategy,
    TrainConfig,
    UpdateStrategy,
    evaluate,
    forward,
    loss_and_gradients,
    sgd_step,
    train_continual,
)
from .memory import (
    MemoryBuffer,
    RetrievalConfig,
    Sample,
    balanced_subsample,
    reservoir_update,
    retrieve_aser,
    retrieve_random,
    sv_update,
)
from .metrics import AccuracyMatrix, average_accuracy, average_forgetting
from .numeric import RngStream
from .scoring import ScoreVariant, asv, asv_mu, dist_mu_score, dist_score
from .stream import TaskStream, TaskStreamSpec, generate_synthetic_stream, load_embedding_dataset

__version__ = "0.1.0"
