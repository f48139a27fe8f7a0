"""Pure-NumPy Monte-Carlo sampling kernels (fallback backend).

Both backends consume one uniform variate per sample per step and must make
exactly the same comparisons, so results are bit-identical regardless of
which one is selected at import time.
"""

import numpy as np

BACKEND = "python"


def initial_step(u, init_cum, init_info, states, acc):
    """Pick initial states from inclusive-cumulative probabilities.

    states[i] becomes the first index j with u[i] < init_cum[j]; acc[i] is
    initialized with that state's surprisal.
    """
    np.sum(u[:, None] >= init_cum[None, :], axis=1, out=states)
    acc[:] = init_info[states]


def markov_step(u, cum_rows, info_rows, states, acc):
    """Advance every chain one transition, accumulating transition surprisal."""
    rows = cum_rows[states]
    nxt = np.sum(u[:, None] >= rows, axis=1)
    acc += info_rows[states, nxt]
    states[:] = nxt
