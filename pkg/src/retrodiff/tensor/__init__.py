from retrodiff.tensor.autograd import Tape, Tensor, backward, current_tape, gradcheck
from retrodiff.tensor.optim import Adam, AdamState, adam_step

__all__ = [
    "Adam",
    "AdamState",
    "Tape",
    "Tensor",
    "adam_step",
    "backward",
    "current_tape",
    "gradcheck",
]
