"""
Certification reports and deterministic trial execution.

Every trial draws from its own generator, np.random.default_rng([seed, *key,
index]), so a report depends only on (seed, key, trials, spec) and not on
how the trials were scheduled.  Aggregation keeps the trial with the
smallest relative margin; ties go to the lowest trial index.

"""
import concurrent.futures
import dataclasses
import logging

import numpy as np

from opconvex.config import resolve
from opconvex.errors import DomainError, EigensolverError, OpConvexError
from opconvex import matrixio

log = logging.getLogger(__name__)

CONVEX = 'CONVEX-consistent'
CONCAVE = 'CONCAVE-consistent'
VIOLATION = 'VIOLATION'

DIRECTIONS = ('convex', 'concave')


@dataclasses.dataclass(frozen=True)
class TrialResult(object):
    margin: float
    scale: float = 1.0
    witness: object = None
    index: int = 0
    resamples: int = 0

    @property
    def relative(self):
        return self.margin / self.scale


@dataclasses.dataclass(frozen=True)
class ConvexityReport(object):
    """Outcome of a randomized (or exhaustive) convexity check.

    worst_margin is the raw margin of the worst trial, chosen by relative
    margin (margin / scale).  The verdict is VIOLATION iff that relative
    margin is below -violation_tol.  witness holds the inputs of the worst
    trial, details any check-specific extras.

    """
    verdict: str
    trials: int
    worst_margin: object
    witness: object
    seed: int
    direction: str = 'convex'
    worst_relative: object = None
    worst_index: object = None
    details: dict = dataclasses.field(default_factory=dict)

    @property
    def violated(self):
        return self.verdict == VIOLATION

    @property
    def consistent(self):
        return not self.violated

    def to_json(self):
        return {
            'verdict': self.verdict,
            'direction': self.direction,
            'trials': self.trials,
            'worst_margin': self.worst_margin,
            'worst_relative': self.worst_relative,
            'worst_index': self.worst_index,
            'witness': matrixio.to_jsonable(self.witness),
            'seed': self.seed,
            'details': matrixio.to_jsonable(self.details),
        }


def consistent_verdict(direction):
    if direction not in DIRECTIONS:
        raise ValueError('direction must be convex or concave: %r'
                         % (direction,))
    return CONVEX if direction == 'convex' else CONCAVE


def worst_of(results):
    if not results:
        return None
    return min(results, key=lambda r: (r.relative, r.index))


def summarize(results, direction, seed, tol=None, details=None):
    """Aggregate trial results into a ConvexityReport."""
    tol = resolve(tol)
    details = dict(details or {})
    details.setdefault('resampled', sum(r.resamples for r in results))
    verdict = consistent_verdict(direction)
    worst = worst_of(results)
    if worst is None:
        return ConvexityReport(verdict, 0, None, None, seed, direction,
                               details=details)
    if worst.relative < -tol.violation_tol:
        verdict = VIOLATION
    report = ConvexityReport(verdict, len(results), float(worst.margin),
                             worst.witness, seed, direction,
                             float(worst.relative), worst.index, details)
    log.debug('%s: %d trials, worst margin %.3e (trial %s)', verdict,
              report.trials, report.worst_margin, report.worst_index)
    return report


def merge_reports(reports, direction, seed, tol=None, details=None):
    """Combine reports of the same direction; the worst relative margin wins."""
    tol = resolve(tol)
    reports = [r for r in reports if r.trials]
    total = sum(r.trials for r in reports)
    if not reports:
        return summarize([], direction, seed, tol, details)
    worst = min(reports, key=lambda r: r.worst_relative)
    verdict = consistent_verdict(direction)
    if worst.worst_relative < -tol.violation_tol:
        verdict = VIOLATION
    return ConvexityReport(verdict, total, worst.worst_margin, worst.witness,
                           seed, direction, worst.worst_relative,
                           worst.worst_index, dict(details or {}))


def trial_rng(seed, key, index):
    return np.random.default_rng([int(seed)] + [int(k) for k in key]
                                 + [int(index)])


_RESAMPLED = (DomainError, EigensolverError, np.linalg.LinAlgError,
              FloatingPointError)


def run_trials(trial_fn, trials, seed, threads=1, key=(), tol=None, start=0):
    """Run trial_fn(rng) for each trial index.

    A draw that leaves a domain, defeats the eigensolver or yields a
    non-finite margin is discarded and resampled from the same stream, at
    most max_resamples times per trial.  TrialResult.resamples counts the
    discarded draws.

    Arguments:
    trial_fn -- callable(rng) -> TrialResult
    trials   -- number of trials
    seed     -- master seed
    threads  -- worker threads; results are identical for any value
    key      -- extra integers mixed into every trial stream
    start    -- index of the first trial

    Return:
    list of TrialResult in trial order

    """
    tol = resolve(tol)

    def one(index):
        rng = trial_rng(seed, key, index)
        last = None
        for attempt in range(tol.max_resamples):
            try:
                result = trial_fn(rng)
            except _RESAMPLED as ex:
                last = ex
            else:
                if np.isfinite(result.margin) and np.isfinite(result.scale):
                    return dataclasses.replace(result, index=index,
                                               resamples=attempt)
                last = 'non-finite margin %r' % (result.margin,)
            log.debug('trial %d resampled: %s', index, last)
        raise OpConvexError('trial %d (seed %d, key %r) failed %d times in '
                            'a row; last: %s' % (index, seed, tuple(key),
                                                 tol.max_resamples, last))

    indices = range(start, start + trials)
    if threads and threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, indices))
    return [one(index) for index in indices]
