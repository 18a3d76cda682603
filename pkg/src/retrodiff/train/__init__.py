from retrodiff.train.augment import PaddedTarget, clamp_delta, pad_augment
from retrodiff.train.data import (
    ReactionRecord,
    TrainingPair,
    load_dataset,
    parse_reaction,
    read_reactions,
    training_pairs,
    write_dataset,
)
from retrodiff.train.losses import length_loss, mse_loss, vlb_loss
from retrodiff.train.synth import Template, apply_forward, synth_dataset
from retrodiff.train.timesteps import LossSecondMomentSampler, ScheduleSampler, UniformSampler, get_sampler
from retrodiff.train.trainer import LossBreakdown, Trainer, TrainResult, train_ensemble, train_model, train_step

__all__ = [
    "LossBreakdown",
    "LossSecondMomentSampler",
    "PaddedTarget",
    "ReactionRecord",
    "ScheduleSampler",
    "Template",
    "TrainResult",
    "Trainer",
    "TrainingPair",
    "UniformSampler",
    "apply_forward",
    "clamp_delta",
    "get_sampler",
    "length_loss",
    "load_dataset",
    "mse_loss",
    "pad_augment",
    "parse_reaction",
    "read_reactions",
    "synth_dataset",
    "train_ensemble",
    "train_model",
    "train_step",
    "training_pairs",
    "vlb_loss",
]
