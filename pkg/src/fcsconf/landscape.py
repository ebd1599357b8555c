"""Enumerable signed-bit fitness landscapes and their interaction features."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

MAX_LENGTH = 16


class LandscapeFormatError(ValueError):
    pass


def all_sequences(L):
    """All ``2**L`` signed-bit rows; row ``k`` is the binary expansion of ``k``
    (most significant bit first) with 0 -> -1 and 1 -> +1."""
    k = np.arange(2**L)[:, None]
    bits = (k >> np.arange(L - 1, -1, -1)[None, :]) & 1
    return (2 * bits - 1).astype(float)


@lru_cache(maxsize=None)
def interaction_terms(L, order):
    """Index tuples of every product of up to ``order`` distinct coordinates."""
    return tuple(c for k in range(1, order + 1) for c in itertools.combinations(range(L), k))


def n_interaction_features(L, order):
    return sum(math.comb(L, k) for k in range(1, order + 1))


def featurize(seqs, order):
    """Interaction features of signed-bit rows, ordered by order then lexically."""
    seqs = np.atleast_2d(np.asarray(seqs, dtype=float))
    L = seqs.shape[1]
    terms = interaction_terms(L, order)
    out = np.empty((seqs.shape[0], len(terms)))
    for j, c in enumerate(terms):
        out[:, j] = np.prod(seqs[:, c], axis=1)
    return out


@dataclass(frozen=True)
class Landscape:
    """Every signed-bit sequence of length ``L`` with its fitness and noise sd.

    Row ``k`` of :attr:`sequences` is sequence id ``k`` (see
    :func:`all_sequences`).
    """

    length: int
    fitness: np.ndarray
    noise_sd: np.ndarray
    feature_order: int = 2

    def __post_init__(self):
        if not 1 <= self.length <= MAX_LENGTH:
            raise ValueError(f"L={self.length} outside supported range 1..{MAX_LENGTH}")
        f = np.asarray(self.fitness, dtype=float).ravel()
        sd = np.broadcast_to(np.asarray(self.noise_sd, dtype=float), f.shape).copy()
        if f.shape[0] != 2**self.length:
            raise ValueError(f"expected {2**self.length} fitness values, got {f.shape[0]}")
        if not np.all(np.isfinite(f)):
            raise ValueError("fitness must be finite")
        if np.any(sd < 0) or not np.all(np.isfinite(sd)):
            raise ValueError("noise_sd must be finite and nonnegative")
        if not 1 <= self.feature_order <= self.length:
            raise ValueError("feature_order must lie in 1..L")
        object.__setattr__(self, "fitness", f)
        object.__setattr__(self, "noise_sd", sd)

    @property
    def size(self):
        return self.fitness.shape[0]

    @property
    def sequences(self):
        return all_sequences(self.length)

    @property
    def features(self):
        return _features(self.length, self.feature_order)

    @property
    def fitness_range(self):
        return float(self.fitness.min()), float(self.fitness.max())

    def with_feature_order(self, order):
        return Landscape(self.length, self.fitness, self.noise_sd, order)


@lru_cache(maxsize=8)
def _features(L, order):
    X = featurize(all_sequences(L), order)
    X.flags.writeable = False
    return X


def generate_synthetic_landscape(L, max_order, coeff_sd_per_order, noise_sd=0.0, seed=0,
                                 feature_order=2):
    """Random interaction landscape.

    Fitness is a linear combination of all interaction terms up to
    ``max_order`` with independent zero-mean Gaussian coefficients; order-``k``
    coefficients have standard deviation ``coeff_sd_per_order[k - 1]``.
    """
    if not 2 <= L <= MAX_LENGTH:
        raise ValueError(f"L={L} unsupported; enumeration requires 2 <= L <= {MAX_LENGTH}")
    if not 1 <= max_order <= L:
        raise ValueError("max_order must lie in 1..L")
    sds = list(coeff_sd_per_order)
    if len(sds) != max_order:
        raise ValueError(f"need {max_order} per-order coefficient sds, got {len(sds)}")
    rng = np.random.default_rng(seed)
    terms = interaction_terms(L, max_order)
    coef = np.array([rng.normal(0.0, sds[len(c) - 1]) for c in terms])
    fitness = featurize(all_sequences(L), max_order) @ coef
    return Landscape(L, fitness, np.full(2**L, float(noise_sd)),
                     feature_order=min(feature_order, L))


def estimate_noise_sd(landscape: Landscape, order=7) -> Landscape:
    """Per-sequence noise sd as the absolute residual of a least-squares fit
    on an intercept plus all interaction terms up to ``order``."""
    L = landscape.length
    if not 1 <= order <= L:
        raise ValueError(f"order={order} must lie in 1..{L}")
    X = np.hstack([np.ones((landscape.size, 1)), featurize(landscape.sequences, order)])
    coef, _, rank, _ = np.linalg.lstsq(X, landscape.fitness, rcond=None)
    if rank < X.shape[1]:
        raise np.linalg.LinAlgError(f"interaction design is rank deficient ({rank} < {X.shape[1]})")
    resid = landscape.fitness - X @ coef
    return Landscape(L, landscape.fitness, np.abs(resid), landscape.feature_order)


# ---------------------------------------------------------------------------
# CSV I/O: header ``seq,fitness,noise_sd``; ``seq`` is a 0/1 string.

def _seq_string(k, L):
    return format(k, f"0{L}b")


def save_landscape(landscape: Landscape, path):
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seq", "fitness", "noise_sd"])
    for k in range(landscape.size):
        w.writerow([_seq_string(k, landscape.length), repr(float(landscape.fitness[k])),
                    repr(float(landscape.noise_sd[k]))])
    path.write_text(buf.getvalue(), encoding="utf-8")


def load_landscape(path, feature_order=2, noise_order=7) -> Landscape:
    """Read a landscape CSV and validate completeness.

    When the ``noise_sd`` column is absent, per-sequence noise is estimated
    with :func:`estimate_noise_sd` at ``min(noise_order, L - 1)``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "seq" not in fields or "fitness" not in fields:
            raise LandscapeFormatError(f"{path}: header must contain seq,fitness[,noise_sd]")
        has_sd = "noise_sd" in fields
        rows = list(reader)
    if not rows:
        raise LandscapeFormatError(f"{path}: no data rows")
    L = len(rows[0]["seq"].strip())
    if not 1 <= L <= MAX_LENGTH:
        raise LandscapeFormatError(f"{path}: sequence length {L} unsupported (max {MAX_LENGTH})")
    fitness = np.full(2**L, np.nan)
    sd = np.zeros(2**L)
    seen = np.zeros(2**L, dtype=bool)
    for lineno, row in enumerate(rows, start=2):
        s = row["seq"].strip()
        if len(s) != L or set(s) - {"0", "1"}:
            raise LandscapeFormatError(f"{path}:{lineno}: bad sequence {s!r}; expected {L} chars of 0/1")
        k = int(s, 2)
        if seen[k]:
            raise LandscapeFormatError(f"{path}:{lineno}: duplicate sequence {s}")
        seen[k] = True
        try:
            fitness[k] = float(row["fitness"])
            if has_sd:
                sd[k] = float(row["noise_sd"])
        except (TypeError, ValueError) as exc:
            raise LandscapeFormatError(f"{path}:{lineno}: {exc}") from None
    if not seen.all():
        missing = _seq_string(int(np.flatnonzero(~seen)[0]), L)
        raise LandscapeFormatError(
            f"{path}: {int((~seen).sum())} of {2**L} sequences missing, e.g. {missing}")
    order = min(feature_order, L)
    land = Landscape(L, fitness, sd, order)
    if not has_sd:
        land = estimate_noise_sd(land, order=min(noise_order, max(L - 1, 1)))
    return land
