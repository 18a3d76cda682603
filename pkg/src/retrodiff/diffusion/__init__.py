from retrodiff.diffusion.categorical import (
    CategoricalSeq,
    SeqKind,
    posterior,
    q_from_start,
    q_step,
    sample_categorical,
)
from retrodiff.diffusion.embedding import sinusoidal, timestep_embedding
from retrodiff.diffusion.sampling import Denoiser, generate, reverse_step, strip_trailing
from retrodiff.diffusion.schedule import NoiseSchedule, cosine_schedule

__all__ = [
    "CategoricalSeq",
    "Denoiser",
    "NoiseSchedule",
    "SeqKind",
    "cosine_schedule",
    "generate",
    "posterior",
    "q_from_start",
    "q_step",
    "reverse_step",
    "sample_categorical",
    "sinusoidal",
    "strip_trailing",
    "timestep_embedding",
]
