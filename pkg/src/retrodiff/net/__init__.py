from retrodiff.net.checkpoint import CHECKPOINT_VERSION, load_checkpoint, read_meta, save_checkpoint
from retrodiff.net.config import ModelConfig
from retrodiff.net.model import DiffusionTransformer, delta_to_length, init_params

__all__ = [
    "CHECKPOINT_VERSION",
    "DiffusionTransformer",
    "ModelConfig",
    "delta_to_length",
    "init_params",
    "load_checkpoint",
    "read_meta",
    "save_checkpoint",
]
