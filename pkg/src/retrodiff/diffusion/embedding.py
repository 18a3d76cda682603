from __future__ import annotations

import numpy as np

from retrodiff.errors import ContractError

EMBEDDING_BASE = 10000.0


def sinusoidal(positions: np.ndarray, dim: int) -> np.ndarray:
    """Rows of interleaved ``[sin(p w_0), cos(p w_0), sin(p w_1), ...]`` with ``w_i = base^(-2i/dim)``."""
    if dim <= 0 or dim % 2:
        raise ContractError(f"sinusoidal embedding needs a positive even dim, got {dim}")
    values = np.asarray(positions, dtype=np.float64).reshape(-1, 1)
    frequencies = EMBEDDING_BASE ** (-np.arange(0, dim, 2, dtype=np.float64) / dim)
    angles = values * frequencies
    out = np.empty((values.shape[0], dim))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def timestep_embedding(t: float, dim: int) -> np.ndarray:
    return sinusoidal(np.array([t]), dim)[0]
