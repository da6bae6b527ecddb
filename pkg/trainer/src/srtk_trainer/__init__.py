"""Scorer trainer and embedding server for the subgraph-retrieval pipeline."""

from .losses import loss_cross_entropy, loss_ntxent
from .pooling import pool_hidden_states, select_pooling
from .samples import TrainSample, read_train_samples
from .serving import EmbeddingServer, EmbeddingService, serve
from .training import TrainerConfig, encode, train

__version__ = "0.1.0"
