"""
Tolerances and run configuration.

All numeric tolerances live in one frozen record so that every check in the
package, and every acceptance criterion that quotes a number, refers to the
same values.  Operations take an optional ``tol`` argument and fall back to
DEFAULT_TOLERANCES.

A run may also be described by a JSON configuration file whose keys mirror
the long command line flags:

    {
        "seed": 42,
        "trials": 1000,
        "threads": 4,
        "out": "report.json",
        "quiet": false,
        "tolerances": {"psd_tol": 1e-10}
    }

Flags given on the command line always override values from the file.

"""
import dataclasses
import json
import logging
import os

from opconvex.errors import ConfigError

log = logging.getLogger(__name__)

THREADS_ENV = 'OPCONVEX_THREADS'

CONFIG_KEYS = ('seed', 'trials', 'threads', 'out', 'quiet', 'verbose',
               'tolerances')


@dataclasses.dataclass(frozen=True)
class Tolerances(object):
    hermiticity: float = 1e-12
    psd_tol: float = 1e-10
    reconstruction: float = 1e-9
    cluster_tol: float = 1e-8
    dd_tol: float = 1e-7
    violation_tol: float = 1e-9
    jacobi_max_sweeps: int = 100
    jacobi_rel_tol: float = 1e-13
    tensor_cap: int = 4096
    max_resamples: int = 50

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if value < 0:
                raise ConfigError('tolerance %s must be non-negative: %r'
                                  % (field.name, value))
        if self.jacobi_max_sweeps < 1 or self.tensor_cap < 1:
            raise ConfigError('sweep and tensor caps must be positive')

    def replace(self, **changes):
        """Return a copy with the given fields overridden."""
        return dataclasses.replace(self, **changes)

    def to_json(self):
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def resolve(tol):
    """Return tol, or the package defaults when tol is None."""
    return DEFAULT_TOLERANCES if tol is None else tol


def tolerances_from_json(obj, base=None):
    """Build Tolerances from a (possibly partial) JSON object."""
    base = resolve(base)
    if obj is None:
        return base
    if not isinstance(obj, dict):
        raise ConfigError('tolerances must be a JSON object')
    known = {f.name for f in dataclasses.fields(Tolerances)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError('unknown tolerance(s): ' + ', '.join(unknown))
    try:
        return base.replace(**obj)
    except TypeError as ex:
        raise ConfigError('bad tolerance value: %s' % (ex,))


def load_config(path):
    """Read a JSON run configuration.

    Arguments:
    path -- Path to the configuration file.

    Return:
    dict with a subset of CONFIG_KEYS.

    """
    if not os.path.isfile(path):
        raise ConfigError('configuration not found: ' + path)
    log.info('reading configuration from %s', path)
    with open(path) as conf_file:
        try:
            cfg = json.load(conf_file)
        except ValueError as ex:
            raise ConfigError('configuration is not valid JSON: %s' % (ex,))
    if not isinstance(cfg, dict):
        raise ConfigError('configuration must be a JSON object: ' + path)
    unknown = sorted(set(cfg) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError('unknown configuration key(s): ' + ', '.join(unknown))
    return cfg


def merge_config(file_cfg, args):
    """Overlay command line values on top of file values.

    Arguments:
    file_cfg -- dict from load_config, or None
    args     -- argparse Namespace; attributes left at None are not set

    Return:
    dict holding the effective seed, trials, threads, out, quiet, verbose
    and a Tolerances instance under 'tolerances'.

    """
    merged = {'seed': 0, 'trials': None, 'threads': None, 'out': None,
              'quiet': False, 'verbose': False, 'tolerances': None}
    merged.update(file_cfg or {})
    for key in CONFIG_KEYS:
        if key == 'tolerances':
            continue
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = value
    merged['tolerances'] = tolerances_from_json(merged['tolerances'])
    if merged['threads'] is None:
        merged['threads'] = thread_count()
    seed = merged['seed']
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError('seed must be a non-negative integer: %r' % (seed,))
    for key in ('trials', 'threads'):
        value = merged[key]
        if value is not None and (not isinstance(value, int) or value < 1):
            raise ConfigError('%s must be a positive integer: %r'
                              % (key, value))
    return merged


def thread_count(environ=None):
    """Parallelism cap from OPCONVEX_THREADS (default 1)."""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError('%s must be an integer: %r' % (THREADS_ENV, raw))
    if threads < 1:
        raise ConfigError('%s must be positive: %r' % (THREADS_ENV, raw))
    return threads
