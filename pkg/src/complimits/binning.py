"""Random binning: exact expected error and a Monte-Carlo cross-check.

A binning compressor maps source outcomes into N bins uniformly and
independently; the decompressor picks the most likely outcome in the
received bin, breaking ties uniformly at random.  Averaged over all bin
assignments, the success probability of an outcome with per-string
probability p, J-1 equal-probability peers and M strictly heavier peers is

    sum_{l=0}^{J-1} C(J-1, l) / (N^l (1+l)) * (1 - 1/N)^(M + J - l - 1),

which this module evaluates both as the direct sum (small J) and through the
closed form  (N/J) q^M (1 - q^J)  with q = 1 - 1/N (large J); the two paths
cross-check each other.  N = 1 is legitimate: the decoder simply guesses the
global argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DistributionError
from .spectrum import InformationSpectrum
from .sources import FiniteDistribution

DIRECT_SUM_MAX_J = 64
EQUAL_PROB_RTOL = 1e-12

__all__ = [
    "BinningProblem",
    "MassProfile",
    "mass_profile",
    "binning_error_exact",
    "binning_error_mc",
]


@dataclass(frozen=True)
class BinningProblem:
    """An exact source description plus a bin count N >= 1."""

    dist: Union[FiniteDistribution, InformationSpectrum]
    n_bins: int

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError("need at least one bin")
        if isinstance(self.dist, InformationSpectrum) and not self.dist.exact:
            raise DistributionError("binning needs an exact distribution")


@dataclass(frozen=True)
class MassProfile:
    """One equal-probability class: per-string probability, class size J,
    and the exact count M of strictly heavier strings."""

    per_string_prob: float
    equal_count: int
    heavier_count: int


def mass_profile(dist: Union[FiniteDistribution, InformationSpectrum]) -> list[MassProfile]:
    """Equal-probability classes in decreasing probability order.

    ``heavier_count`` is strictly monotone across classes.  Probabilities
    within a relative 1e-12 of each other are treated as equal, matching the
    spectrum's mass-merge convention.
    """
    if isinstance(dist, InformationSpectrum):
        classes = []
        heavier = 0
        for i, count in enumerate(dist.counts):
            classes.append(MassProfile(dist.per_string_prob(i), count, heavier))
            heavier += count
        return classes
    probs = sorted(dist.probs, reverse=True)
    classes = []
    heavier = 0
    group_p = probs[0]
    group_j = 0
    for p in probs:
        if abs(p - group_p) <= EQUAL_PROB_RTOL * group_p:
            group_j += 1
        else:
            classes.append(MassProfile(group_p, group_j, heavier))
            heavier += group_j
            group_p = p
            group_j = 1
    classes.append(MassProfile(group_p, group_j, heavier))
    return classes


def _pow_q(q: float, exponent: int) -> float:
    """q^exponent for huge integer exponents, 0^0 = 1."""
    if exponent == 0:
        return 1.0
    if q == 0.0:
        return 0.0
    log_term = exponent * math.log(q)
    if log_term < -745.0:
        return 0.0
    return math.exp(log_term)


def _success_factor_direct(n_bins: int, j: int, m_heavier: int) -> float:
    q = 1.0 - 1.0 / n_bins
    terms = []
    if j <= DIRECT_SUM_MAX_J:
        for l in range(j):
            terms.append(
                math.comb(j - 1, l) / (n_bins ** l * (1 + l)) * _pow_q(q, m_heavier + j - l - 1)
            )
        return math.fsum(terms)
    if q == 0.0:
        return (1.0 / j) if m_heavier == 0 else 0.0
    # large classes: same sum, each term through logs to dodge huge integers
    log_q = math.log(q)
    log_n = math.log(n_bins)
    for l in range(j):
        log_term = (
            math.lgamma(j) - math.lgamma(l + 1) - math.lgamma(j - l)
            - l * log_n - math.log1p(l)
            + (m_heavier + j - l - 1) * log_q
        )
        terms.append(math.exp(log_term) if log_term > -745.0 else 0.0)
    return math.fsum(terms)


def _success_factor_closed(n_bins: int, j: int, m_heavier: int) -> float:
    q = 1.0 - 1.0 / n_bins
    if q == 0.0:  # single bin: survive only with no heavier peer, then 1/J tie pick
        return (1.0 / j) if m_heavier == 0 else 0.0
    return (n_bins / j) * _pow_q(q, m_heavier) * (1.0 - _pow_q(q, j))


def binning_error_exact(problem: BinningProblem) -> float:
    """Expected error probability averaged over all uniform bin assignments."""
    total_success = []
    for cls in mass_profile(problem.dist):
        j, m_h = cls.equal_count, cls.heavier_count
        if j <= DIRECT_SUM_MAX_J:
            factor = _success_factor_direct(problem.n_bins, j, m_h)
        else:
            factor = _success_factor_closed(problem.n_bins, j, m_h)
        class_prob = j * cls.per_string_prob
        total_success.append(class_prob * factor)
    return 1.0 - math.fsum(total_success)


def binning_error_mc(problem: BinningProblem, trials: int, seed: int) -> tuple[float, float]:
    """(estimate, standard error) of the binning error over random experiments.

    Each trial draws a fresh uniform bin for every string and one source
    realization, then decodes by maximum likelihood within the realized bin
    with uniform tie-breaking.  Deterministic for a fixed seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    dist = problem.dist
    if isinstance(dist, InformationSpectrum):
        raise DistributionError("Monte-Carlo binning needs an explicit finite distribution")
    m = len(dist)
    probs = dist.prob_array()
    # class structure: heavier[s] / peers[s] index sets per symbol
    order = sorted(range(m), key=lambda i: -probs[i])
    classes = mass_profile(dist)
    class_of = {}
    pos = 0
    for ci, cls in enumerate(classes):
        for i in order[pos : pos + cls.equal_count]:
            class_of[i] = ci
        pos += cls.equal_count

    rng = np.random.Generator(np.random.PCG64(seed))
    bins = rng.integers(0, problem.n_bins, size=(trials, m))
    realization = rng.choice(m, size=trials, p=probs)
    tie_pick = rng.random(trials)

    errors = np.zeros(trials, dtype=bool)
    own_bin = bins[np.arange(trials), realization]
    for s in range(m):
        mask = realization == s
        if not np.any(mask):
            continue
        ci = class_of[s]
        heavier_idx = [i for i in range(m) if class_of[i] < ci]
        peer_idx = [i for i in range(m) if class_of[i] == ci and i != s]
        sub_bins = bins[mask]
        b0 = own_bin[mask]
        if heavier_idx:
            heavier_hit = (sub_bins[:, heavier_idx] == b0[:, None]).any(axis=1)
        else:
            heavier_hit = np.zeros(mask.sum(), dtype=bool)
        if peer_idx:
            ties = (sub_bins[:, peer_idx] == b0[:, None]).sum(axis=1)
        else:
            ties = np.zeros(mask.sum(), dtype=np.int64)
        # uniform pick among the 1 + ties in-bin argmax candidates
        lose_tie = tie_pick[mask] >= 1.0 / (1.0 + ties)
        errors[mask] = heavier_hit | lose_tie
    estimate = float(errors.mean())
    stderr = math.sqrt(max(estimate * (1.0 - estimate), 0.0) / trials)
    return estimate, stderr
