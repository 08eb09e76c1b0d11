"""Neural projection skip-gram (NP-SG).

Word representations computed on the fly from locality-sensitive hash
projections of character features: no embedding lookup table at inference,
so any string (including misspellings) gets a vector.
"""

from npsg.config import TrainConfig
from npsg.projector import BinaryProjection, ProjectionSpec, project, projection_as_input
from npsg.corpus import NoiseTable, PairStream, Vocabulary, build_noise_table, build_vocabulary
from npsg.encoder import EncoderParams, represent
from npsg.evaluate import SimilarityDataset, eval_similarity, nearest_neighbors, spearman
from npsg.model import BaselineSGModel, NPSGModel, load_model, save_model
from npsg.train import train, train_baseline_sg

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "ProjectionSpec",
    "BinaryProjection",
    "project",
    "projection_as_input",
    "Vocabulary",
    "NoiseTable",
    "PairStream",
    "build_vocabulary",
    "build_noise_table",
    "EncoderParams",
    "represent",
    "NPSGModel",
    "BaselineSGModel",
    "save_model",
    "load_model",
    "SimilarityDataset",
    "eval_similarity",
    "nearest_neighbors",
    "spearman",
    "train",
    "train_baseline_sg",
]
