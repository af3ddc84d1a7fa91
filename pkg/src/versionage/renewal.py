"""Renewal event streams, recurrence times, and statistical limit verifiers.

A :class:`RenewalStream` realizes a renewal counting process lazily: gaps are
drawn from the owning distribution in fixed-size batches, so memory stays
bounded no matter how far the stream is advanced, and the emitted event
sequence depends only on (seed, scope), never on how advance() calls are
chunked.

The verifiers check the renewal limit theorems this package's closed forms
rest on, by Monte Carlo at a 4-sigma gate:

* the zero-mean martingale embedded in the counting process,
  M(t) = N(t) + 1 - T_{N(t)+1} / mean;
* the limiting mean backward recurrence time E[Y^2] / (2 E[Y]);
* the windowed-count limit E[N(t) - N(t - S(t))] -> E[S] / E[Y] for a window
  S(t) given by the backward recurrence time of an independent probe stream.

The latter two are long-run (Cesaro) limits, so the verifiers evaluate each
path at a uniformly random time in [t/2, t]; that also makes the deterministic
probe case meaningful, where the recurrence time at a fixed t never converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .errors import InfiniteMoment, InvalidParameter, NoFutureEvent
from .rng import RngStream

__all__ = [
    "GAP_BATCH",
    "RenewalStream",
    "RecurrenceView",
    "recurrence_at",
    "MartingalePoint",
    "LimitCheck",
    "verify_martingale_zero_mean",
    "verify_backward_recurrence_limit",
    "verify_windowed_count_limit",
]

#: gaps drawn per internal batch; fixed so event sequences are independent of
#: how callers chunk their advance() calls
GAP_BATCH = 1024

_MIN_VERIFIER_PATHS = 10_000
_VERIFIER_CHUNK = 4096


class RenewalStream:
    """Lazily generated event times of one renewal process.

    Single-owner: advance from one task only.  Distinct streams may be
    advanced concurrently.
    """

    __slots__ = ("spec", "stream_id", "rng", "_buf", "_pos", "_tail", "_cursor", "_last")

    def __init__(self, spec: Distribution, stream_id, rng: RngStream):
        self.spec = spec
        self.stream_id = stream_id
        self.rng = rng
        self._buf = np.empty(0)
        self._pos = 0
        self._tail = 0.0  # last generated event time
        self._cursor = 0.0  # advance() high-water mark
        self._last = 0.0  # most recent consumed event time

    @property
    def last_event(self) -> float:
        return self._last

    @property
    def next_event(self) -> float:
        return self.peek()

    def _extend(self) -> None:
        gaps = self.spec.sample_batch(self.rng, GAP_BATCH)
        times = self._tail + np.cumsum(gaps)
        self._tail = float(times[-1])
        if self._pos:
            self._buf = self._buf[self._pos :]
            self._pos = 0
        self._buf = np.concatenate([self._buf, times]) if self._buf.size else times

    def peek(self) -> float:
        """Next event time, without consuming it."""
        while self._pos >= self._buf.size:
            self._extend()
        return float(self._buf[self._pos])

    def pop(self) -> float:
        """Consume and return the next event time."""
        t = self.peek()
        self._pos += 1
        self._last = t
        return t

    def advance(self, until: float) -> np.ndarray:
        """All event times in (previous cursor, until]; moves the cursor."""
        if until < self._cursor:
            raise InvalidParameter(
                f"cannot advance backwards: cursor at {self._cursor}, asked {until}"
            )
        while self._tail <= until:
            self._extend()
        # buffer now surely covers (cursor, until]
        hi = self._pos + int(np.searchsorted(self._buf[self._pos :], until, side="right"))
        out = self._buf[self._pos : hi].copy()
        self._pos = hi
        if out.size:
            self._last = float(out[-1])
        self._cursor = until
        return out


def event_times_until(spec: Distribution, rng: RngStream, t: float) -> np.ndarray:
    """Event times from 0 up to and beyond t (the final entry exceeds t).

    Draws gaps in the same fixed batches as :class:`RenewalStream`, so a
    stream and this helper produce the identical event sequence from the same
    generator state.
    """
    chunks = []
    tail = 0.0
    while tail <= t:
        gaps = spec.sample_batch(rng, GAP_BATCH)
        times = tail + np.cumsum(gaps)
        tail = float(times[-1])
        chunks.append(times)
    return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


@dataclass(frozen=True)
class RecurrenceView:
    """Counting-process state at a query time t, with the T_0 = 0 convention."""

    t: float
    count: int
    backward: float
    forward: float


def recurrence_at(events: np.ndarray, t: float) -> RecurrenceView:
    """Backward/forward recurrence times of a realized event sequence at t.

    ``events`` must be sorted strictly increasing and contain at least one
    event after t; an event at exactly t counts as having occurred.
    """
    if t < 0:
        raise InvalidParameter(f"t must be nonnegative, got {t}")
    events = np.asarray(events)
    n = int(np.searchsorted(events, t, side="right"))
    if n >= events.size:
        raise NoFutureEvent(f"no event after t={t}; advance the stream further")
    last = float(events[n - 1]) if n > 0 else 0.0
    return RecurrenceView(t=t, count=n, backward=t - last, forward=float(events[n]) - t)


@dataclass(frozen=True)
class MartingalePoint:
    """Studentized sample mean of the embedded martingale at one time."""

    t: float
    mean: float
    stderr: float
    z: float
    n_paths: int


@dataclass(frozen=True)
class LimitCheck:
    """Monte Carlo estimate of a renewal limit against its analytic target."""

    estimate: float
    target: float
    stderr: float
    z: float
    n_paths: int


def _require_finite_moments(spec: Distribution):
    m = spec.moments()
    if not m.is_finite:
        raise InfiniteMoment(f"{spec} has a divergent moment; the limit theorems need E[Y] and E[Y^2] finite")
    return m


def _check_paths(n_paths: int) -> None:
    if n_paths < _MIN_VERIFIER_PATHS:
        raise InvalidParameter(
            f"verifiers need at least {_MIN_VERIFIER_PATHS} paths for a stable z-score, got {n_paths}"
        )


def _event_matrix(spec: Distribution, rng: RngStream, rows: int, t_max: float) -> np.ndarray:
    """Per-row cumulative event times, every row guaranteed past t_max."""
    mean = spec.moments().mean
    cols = int(1.25 * t_max / mean) + 32
    gaps = spec.sample_batch(rng, rows * cols).reshape(rows, cols)
    csum = np.cumsum(gaps, axis=1)
    while float(csum[:, -1].min()) <= t_max:
        ext = max(32, cols // 8)
        gaps = spec.sample_batch(rng, rows * ext).reshape(rows, ext)
        csum = np.hstack([csum, csum[:, -1:] + np.cumsum(gaps, axis=1)])
    return csum


def _count_at(csum: np.ndarray, t) -> np.ndarray:
    """Row-wise N(t); t is a scalar or a per-row vector."""
    t = np.asarray(t)
    if t.ndim == 1:
        t = t[:, None]
    return (csum <= t).sum(axis=1)


def _zscore(total: float, total_sq: float, n: int) -> tuple[float, float, float]:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    stderr = math.sqrt(var / n)
    if stderr == 0.0:
        return mean, 0.0, 0.0 if mean == 0.0 else math.inf
    return mean, stderr, mean / stderr


def verify_martingale_zero_mean(
    spec: Distribution,
    t_grid,
    n_paths: int,
    master_seed: int = 0,
) -> list[MartingalePoint]:
    """Studentized mean of M(t) = N(t) + 1 - T_{N(t)+1}/mean over n_paths.

    The population mean is exactly zero for every renewal process with a
    finite mean, so each returned z is standard normal under the null.
    """
    m = _require_finite_moments(spec)
    _check_paths(n_paths)
    t_grid = [float(t) for t in t_grid]
    t_max = max(t_grid)
    sums = {t: 0.0 for t in t_grid}
    sums_sq = {t: 0.0 for t in t_grid}
    rng = RngStream(master_seed, "verify-martingale", 0)
    done = 0
    chunk_idx = 0
    while done < n_paths:
        rows = min(_VERIFIER_CHUNK, n_paths - done)
        rng.reseed(master_seed, "verify-martingale", chunk_idx)
        csum = _event_matrix(spec, rng, rows, t_max)
        for t in t_grid:
            counts = _count_at(csum, t)
            t_next = csum[np.arange(rows), counts]
            mart = counts + 1.0 - t_next / m.mean
            sums[t] += float(mart.sum())
            sums_sq[t] += float((mart * mart).sum())
        done += rows
        chunk_idx += 1
    out = []
    for t in t_grid:
        mean, stderr, z = _zscore(sums[t], sums_sq[t], n_paths)
        out.append(MartingalePoint(t=t, mean=mean, stderr=stderr, z=z, n_paths=n_paths))
    return out


def _window_times(rng: RngStream, rows: int, t_large: float) -> np.ndarray:
    """Per-path evaluation times, uniform over [t/2, t]."""
    return t_large * (0.5 + 0.5 * rng.uniforms(rows))


def verify_backward_recurrence_limit(
    spec: Distribution,
    t_large: float,
    n_paths: int,
    master_seed: int = 0,
) -> LimitCheck:
    """Estimate the long-run mean backward recurrence time vs E[Y^2]/(2E[Y]).

    Each path is evaluated at a uniformly random time in [t_large/2, t_large],
    which estimates the Cesaro limit and tolerates arithmetic distributions.
    """
    m = _require_finite_moments(spec)
    _check_paths(n_paths)
    if t_large < 50.0 * m.mean:
        raise InvalidParameter(
            f"t_large must be at least 50 mean gaps ({50 * m.mean:g}), got {t_large}"
        )
    target = m.second_moment / (2.0 * m.mean)
    total = total_sq = 0.0
    done = 0
    chunk_idx = 0
    rng = RngStream(master_seed, "verify-recurrence", 0)
    while done < n_paths:
        rows = min(_VERIFIER_CHUNK, n_paths - done)
        rng.reseed(master_seed, "verify-recurrence", chunk_idx)
        t_eval = _window_times(rng, rows, t_large)
        csum = _event_matrix(spec, rng, rows, t_large)
        counts = _count_at(csum, t_eval)
        last = np.where(counts > 0, csum[np.arange(rows), np.maximum(counts - 1, 0)], 0.0)
        backward = t_eval - last
        total += float(backward.sum())
        total_sq += float((backward * backward).sum())
        done += rows
        chunk_idx += 1
    mean, stderr, _ = _zscore(total, total_sq, n_paths)
    z = (mean - target) / stderr if stderr > 0 else (0.0 if mean == target else math.inf)
    return LimitCheck(estimate=mean, target=target, stderr=stderr, z=z, n_paths=n_paths)


def verify_windowed_count_limit(
    source_spec: Distribution,
    probe_spec: Distribution,
    t_large: float,
    n_paths: int,
    master_seed: int = 0,
) -> LimitCheck:
    """Check E[N(t) - N(t - S(t))] against E[S]/E[Y] for a recurrence window.

    N counts renewals of ``source_spec``; the window S(t) is the backward
    recurrence time of an independent ``probe_spec`` stream, so the limit
    target is (E[Y_probe^2] / (2 E[Y_probe])) / E[Y_source].  Paths are
    evaluated at a uniformly random time in [t_large/2, t_large].
    """
    m_src = _require_finite_moments(source_spec)
    m_probe = _require_finite_moments(probe_spec)
    _check_paths(n_paths)
    if t_large < 50.0 * max(m_src.mean, m_probe.mean):
        raise InvalidParameter(
            f"t_large must be at least 50 mean gaps of both processes, got {t_large}"
        )
    target = (m_probe.second_moment / (2.0 * m_probe.mean)) / m_src.mean
    total = total_sq = 0.0
    done = 0
    chunk_idx = 0
    rng_t = RngStream(master_seed, "verify-window", "times", 0)
    rng_probe = RngStream(master_seed, "verify-window", "probe", 0)
    rng_src = RngStream(master_seed, "verify-window", "source", 0)
    while done < n_paths:
        rows = min(_VERIFIER_CHUNK, n_paths - done)
        rng_t.reseed(master_seed, "verify-window", "times", chunk_idx)
        rng_probe.reseed(master_seed, "verify-window", "probe", chunk_idx)
        rng_src.reseed(master_seed, "verify-window", "source", chunk_idx)
        t_eval = _window_times(rng_t, rows, t_large)
        probe_csum = _event_matrix(probe_spec, rng_probe, rows, t_large)
        src_csum = _event_matrix(source_spec, rng_src, rows, t_large)
        p_counts = _count_at(probe_csum, t_eval)
        p_last = np.where(
            p_counts > 0, probe_csum[np.arange(rows), np.maximum(p_counts - 1, 0)], 0.0
        )
        diff = _count_at(src_csum, t_eval) - _count_at(src_csum, p_last)
        total += float(diff.sum())
        total_sq += float((diff * diff).sum())
        done += rows
        chunk_idx += 1
    mean, stderr, _ = _zscore(total, total_sq, n_paths)
    z = (mean - target) / stderr if stderr > 0 else (0.0 if mean == target else math.inf)
    return LimitCheck(estimate=mean, target=target, stderr=stderr, z=z, n_paths=n_paths)
