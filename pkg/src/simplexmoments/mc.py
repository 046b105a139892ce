"""Monte Carlo estimators for random-simplex volume moments.

Sampling is vectorized with numpy and driven by counter-based Philox
streams: a run with ``samples`` trials is split into fixed chunks of
2**16 trials, chunk i drawing from ``Philox(key=(seed, i))``.  Chunk
results are combined in chunk-index order, so estimates are bit-identical
for a given (seed, samples, configuration) regardless of how many worker
threads execute the chunks.

Estimators cover the catalog bodies of :mod:`simplexmoments.geometry`:
uniform interior sampling (simplices by normalized exponential spacings,
balls by direction times U^(1/d), half-balls by reflection, prisms by
base sample plus uniform height) and boundary-uniform sampling of prisms
over planar polytopes (faces picked with area weights).  Simplex volumes
come from the Gram determinant, so ambient dimension is arbitrary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, UsageError
from .geometry import Body, body_measures, contains, is_polytopal, polygon_edges

__all__ = [
    "CHUNK_SIZE",
    "RNG_ALGORITHM",
    "RngStream",
    "EstimateWithError",
    "sample_uniform",
    "sample_boundary_uniform",
    "estimate_moment",
    "estimate_surface_moment",
]

CHUNK_SIZE = 1 << 16
RNG_ALGORITHM = "numpy-philox4x64"


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream.

    Distinct ``stream_index`` values give statistically independent
    streams; the same (seed, stream_index) always reproduces the same
    sequence, independent of platform thread scheduling.
    """

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=(self.seed & (2**64 - 1), self.stream_index))
        )


@dataclass(frozen=True)
class EstimateWithError:
    """A Monte Carlo mean with its standard error (sample sd / sqrt(N))."""

    mean: float
    std_error: float
    samples: int
    seed: int


def _resolve_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise UsageError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# samplers


def _sample_interior(body: Body, gen: np.random.Generator, m: int) -> np.ndarray:
    d = body.dim
    kind = body.kind
    if kind in ("simplex", "T2", "T3"):
        spacings = gen.standard_exponential((m, d + 1))
        return spacings[:, :d] / spacings.sum(axis=1, keepdims=True)
    if kind == "cube":
        return gen.random((m, d))
    if kind in ("ball", "halfball"):
        direction = gen.standard_normal((m, d))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        radii = gen.random((m, 1)) ** (1.0 / d)
        pts = direction / norms * radii
        if kind == "halfball":
            pts[:, -1] = np.abs(pts[:, -1])
        return pts
    if kind == "product":
        base_pts = _sample_interior(body.base, gen, m)
        heights = gen.random((m, 1)) * float(body.height)
        return np.concatenate([base_pts, heights], axis=1)
    raise UsageError("no interior sampler for body kind %r" % (kind,))


def sample_uniform(body: Body, rng, size: Optional[int] = None) -> np.ndarray:
    """Uniform point(s) in a catalog body; shape (d,) or (size, d)."""
    gen = _resolve_generator(rng)
    m = 1 if size is None else int(size)
    if m < 1:
        raise UsageError("size must be positive")
    pts = _sample_interior(body, gen, m)
    return pts[0] if size is None else pts


def _boundary_faces(body: Body):
    """Faces of a prism over a planar polytope, with their areas."""
    if body.kind != "product":
        raise UsageError("boundary sampling is implemented for prisms only")
    base = body.base
    if not is_polytopal(base):
        raise UsageError("boundary sampling needs a polytopal base (curved "
                         "bases are not supported)")
    if base.dim != 2:
        raise UsageError("boundary sampling needs a planar base")
    edges = polygon_edges(base)
    h = float(body.height)
    base_area = body_measures(base)["volume"]
    faces = [("flat", 0.0, base_area), ("flat", h, base_area)]
    for start, end in edges:
        length = math.hypot(end[0] - start[0], end[1] - start[1])
        faces.append(("side", (start, end), length * h))
    return faces, h


def sample_boundary_uniform(
    body: Body,
    rng,
    size: Optional[int] = None,
    faces: str = "all",
    return_face_mask: bool = False,
):
    """Uniform point(s) on the boundary of a prism K x [0, h].

    The boundary splits into two flat copies of K and one rectangle per
    edge of K; a face is chosen with probability proportional to its area,
    then the point is uniform on the face.  ``faces="flat"`` restricts to
    the two flat copies (the conditional distribution given that no point
    lands on the side band).  With ``return_face_mask`` a boolean array
    marking flat-face points is returned alongside the points.
    """
    if faces not in ("all", "flat"):
        raise UsageError("faces must be 'all' or 'flat'")
    gen = _resolve_generator(rng)
    m = 1 if size is None else int(size)
    if m < 1:
        raise UsageError("size must be positive")
    face_list, h = _boundary_faces(body)
    if faces == "flat":
        face_list = [f for f in face_list if f[0] == "flat"]
    weights = np.array([f[2] for f in face_list])
    choice = gen.choice(len(face_list), size=m, p=weights / weights.sum())
    pts = np.empty((m, body.dim))
    flat_mask = np.zeros(m, dtype=bool)
    for idx, (tag, payload, _area) in enumerate(face_list):
        mask = choice == idx
        count = int(mask.sum())
        if not count:
            continue
        if tag == "flat":
            base_pts = _sample_interior(body.base, gen, count)
            pts[mask, :-1] = base_pts
            pts[mask, -1] = payload
            flat_mask[mask] = True
        else:
            (sx, sy), (ex, ey) = payload
            s = gen.random(count)
            pts[mask, 0] = sx + s * (ex - sx)
            pts[mask, 1] = sy + s * (ey - sy)
            pts[mask, -1] = gen.random(count) * h
    if size is None:
        pts = pts[0]
        flat_mask = bool(flat_mask[0])
    if return_face_mask:
        return pts, flat_mask
    return pts


# ---------------------------------------------------------------------------
# estimators


def _simplex_volumes(pts: np.ndarray) -> np.ndarray:
    """(n-1)-volumes of simplices given as an (m, n, d) vertex array."""
    edges = pts[:, 1:, :] - pts[:, :1, :]
    gram = edges @ edges.transpose(0, 2, 1)
    dets = np.linalg.det(gram)
    np.maximum(dets, 0.0, out=dets)
    n = pts.shape[1]
    return np.sqrt(dets) / math.factorial(n - 1)


def _combine_chunks(partials, samples: int, seed: int) -> EstimateWithError:
    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    mean = total / samples
    if samples > 1:
        var = max(total_sq - samples * mean * mean, 0.0) / (samples - 1)
        std_error = math.sqrt(var / samples)
    else:
        std_error = float("inf")
    return EstimateWithError(mean, std_error, samples, seed)


def _chunk_layout(samples: int):
    full, rest = divmod(samples, CHUNK_SIZE)
    sizes = [CHUNK_SIZE] * full
    if rest:
        sizes.append(rest)
    return sizes


def _run_chunks(worker, samples: int, seed: int, threads: int):
    sizes = _chunk_layout(samples)
    indexed = list(enumerate(sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda job: worker(*job), indexed))
    else:
        partials = [worker(idx, size) for idx, size in indexed]
    return _combine_chunks(partials, samples, seed)


def _check_common(body: Body, n: int, samples: int, low_n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < low_n:
        raise UsageError("need at least %d vertices" % low_n)
    if n > body.dim + 1:
        raise UsageError(
            "a %d-vertex simplex needs ambient dimension >= %d, body has %d"
            % (n, n - 1, body.dim)
        )
    if not isinstance(samples, int) or samples < 1:
        raise UsageError("samples must be a positive integer")


def estimate_moment(
    body: Body,
    n: int,
    k: int,
    *,
    fixed: Optional[Sequence[float]] = None,
    samples: int,
    seed: int,
    threads: int = 1,
) -> EstimateWithError:
    """Estimate E V^k for the (n-1)-simplex of n uniform points in body.

    With ``fixed`` supplied, that point replaces one of the n random
    vertices (it must lie in the closed body).  Deterministic for a given
    (seed, samples, configuration), independent of ``threads``.
    """
    _check_common(body, n, samples, 2)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise UsageError("moment order k must be a positive integer")
    anchor = None
    if fixed is not None:
        anchor = np.asarray([float(v) for v in fixed])
        if anchor.shape != (body.dim,):
            raise UsageError("fixed point has wrong dimension")
        if not contains(body, tuple(float(v) for v in anchor), tol=1e-12):
            raise DomainError("fixed point lies outside the body")
    n_random = n if anchor is None else n - 1

    def worker(chunk_index: int, size: int):
        gen = RngStream(seed, chunk_index).generator()
        flat = _sample_interior(body, gen, size * n_random)
        pts = flat.reshape(size, n_random, body.dim)
        if anchor is not None:
            fixed_col = np.broadcast_to(anchor, (size, 1, body.dim))
            pts = np.concatenate([fixed_col, pts], axis=1)
        values = _simplex_volumes(pts) ** k
        return float(values.sum()), float((values * values).sum())

    return _run_chunks(worker, samples, seed, threads)


def estimate_surface_moment(
    body: Body,
    n: int,
    *,
    samples: int,
    seed: int,
    threads: int = 1,
) -> EstimateWithError:
    """Estimate the mean total facet volume of the random (n-1)-simplex.

    The boundary of an (n-1)-simplex is the union of its n facets, each an
    (n-2)-simplex; for n = 3 the statistic is the triangle perimeter.
    Requires n >= 3 so the facets have positive dimension.
    """
    _check_common(body, n, samples, 3)

    def worker(chunk_index: int, size: int):
        gen = RngStream(seed, chunk_index).generator()
        flat = _sample_interior(body, gen, size * n)
        pts = flat.reshape(size, n, body.dim)
        totals = np.zeros(size)
        for skip in range(n):
            keep = [j for j in range(n) if j != skip]
            totals += _simplex_volumes(pts[:, keep, :])
        return float(totals.sum()), float((totals * totals).sum())

    return _run_chunks(worker, samples, seed, threads)
