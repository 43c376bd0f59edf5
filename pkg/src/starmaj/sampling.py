"""Deterministic sample generation shared by the certificate routines.

All randomness derives from one integer seed; each consumer asks for a named
stream so that adding a new consumer never shifts the draws of another.
"""

from dataclasses import asdict, dataclass, field
import zlib

import numpy as np

from .errors import InputError

DEFAULT_LAMBDAS = tuple(round(0.025 * k, 10) for k in range(1, 40))


def derive_rng(seed, name):
    """Independent generator for the stream ``name`` under ``seed``."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


@dataclass(frozen=True)
class Sampler:
    """Sampling plan: full tensor grid of the box plus seeded uniform triples.

    ``max_grid_triples`` caps the grid part; when the tensor grid would
    exceed it the per-axis density is reduced (the effective density is
    echoed in every report).
    """

    grid_points: int = 21
    lambdas: tuple = DEFAULT_LAMBDAS
    n_random: int = 2000
    seed: int = 42
    max_grid_triples: int = 20_000_000

    def __post_init__(self):
        if self.grid_points < 0 or self.n_random < 0:
            raise InputError("sample counts must be nonnegative")
        if any(not 0.0 < lam < 1.0 for lam in self.lambdas):
            raise InputError("grid lambdas must lie in (0, 1)")

    def to_dict(self):
        out = asdict(self)
        out["lambdas"] = list(self.lambdas)
        return out

    def effective_grid_points(self, d, with_lambda=True):
        g = self.grid_points
        per = len(self.lambdas) if with_lambda else 1
        while g > 1 and (g ** d) ** 2 * per > self.max_grid_triples:
            g -= 1
        return g


def box_arrays(box):
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise InputError("domain box must be a list of [lo, hi] pairs")
    lo, hi = box[:, 0], box[:, 1]
    if np.any(hi < lo) or not np.all(np.isfinite(box)):
        raise InputError("domain box is empty or unbounded")
    return lo, hi


def grid(box, points_per_axis):
    """Tensor grid of the closed box, shape ``(g**d, d)``, C order."""
    lo, hi = box_arrays(box)
    if points_per_axis <= 0:
        return np.zeros((0, lo.size))
    axes = [np.linspace(a, b, points_per_axis) if points_per_axis > 1 else np.array([(a + b) / 2])
            for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def uniform(box, n, rng):
    lo, hi = box_arrays(box)
    return lo + (hi - lo) * rng.random((n, lo.size))


def interior_box(box, margin=1e-9):
    """Open box shrunk by a relative margin on every side."""
    lo, hi = box_arrays(box)
    pad = margin * np.maximum(hi - lo, 1.0)
    return np.stack([lo + pad, hi - pad], axis=1)


def iter_triples(box, sampler, chunk=1_000_000, name="triples"):
    """Yield ``(X, Y, L)`` chunks: grid triples first (lambda-major), then random.

    Enumeration order is fixed, so the first minimum over the concatenation
    is reproducible.
    """
    lo, _ = box_arrays(box)
    d = lo.size
    g = sampler.effective_grid_points(d)
    pts = grid(box, g)
    n = pts.shape[0]
    if n and sampler.lambdas:
        rows = max(1, chunk // max(n, 1))
        for lam in sampler.lambdas:
            for start in range(0, n, rows):
                i = np.arange(start, min(n, start + rows))
                X = np.repeat(pts[i], n, axis=0)
                Y = np.tile(pts, (i.size, 1))
                yield X, Y, np.full(X.shape[0], lam)
    if sampler.n_random:
        rng = derive_rng(sampler.seed, name)
        X = uniform(box, sampler.n_random, rng)
        Y = uniform(box, sampler.n_random, rng)
        L = rng.uniform(0.0, 1.0, sampler.n_random)
        L = np.clip(L, 1e-12, 1 - 1e-12)
        yield X, Y, L


def iter_pairs(box, sampler, chunk=1_000_000, name="pairs"):
    """Yield ``(X, Y)`` chunks: all grid pairs, then random pairs."""
    lo, _ = box_arrays(box)
    g = sampler.effective_grid_points(lo.size, with_lambda=False)
    pts = grid(box, g)
    n = pts.shape[0]
    if n:
        rows = max(1, chunk // n)
        for start in range(0, n, rows):
            i = np.arange(start, min(n, start + rows))
            yield np.repeat(pts[i], n, axis=0), np.tile(pts, (i.size, 1))
    if sampler.n_random:
        rng = derive_rng(sampler.seed, name)
        yield uniform(box, sampler.n_random, rng), uniform(box, sampler.n_random, rng)


def sample_points(box, sampler, name="points"):
    """Grid points plus random points of the box, as one ``(n, d)`` array."""
    lo, _ = box_arrays(box)
    g = sampler.effective_grid_points(lo.size, with_lambda=False)
    parts = [grid(box, g)]
    if sampler.n_random:
        parts.append(uniform(box, sampler.n_random, derive_rng(sampler.seed, name)))
    return np.concatenate(parts, axis=0)


@dataclass
class MinTracker:
    """Running minimum with first-occurrence tie breaking."""

    worst: float = float("inf")
    witness: tuple = None
    count: int = 0
    extra: dict = field(default_factory=dict)

    def update(self, slack, make_witness):
        slack = np.asarray(slack, dtype=float)
        self.count += slack.size
        if slack.size == 0:
            return
        bad = np.isnan(slack)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            self.worst = float("nan")
            self.witness = make_witness(i)
            return
        if self.worst != self.worst:  # already NaN
            return
        i = int(np.argmin(slack))
        if slack[i] < self.worst:
            self.worst = float(slack[i])
            self.witness = make_witness(i)
