"""
JSON formats and command line value parsing.

Matrices are stored as

    {"rows": n, "cols": m, "re": [[...], ...], "im": [[...], ...]}

with row-major real and imaginary parts.  Data set grids are stored as
{"nodes": [[...], [...]]}, one ascending node list per variable.

"""
import dataclasses
import json
import math
import sys

import numpy as np

from opconvex.errors import ConfigError, SerializationError


def matrix_to_json(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {'rows': int(a.shape[0]), 'cols': int(a.shape[1]),
            're': a.real.tolist(), 'im': a.imag.tolist()}


def matrix_from_json(obj, hermitian=False, tol=None):
    """Decode a matrix object; validate hermiticity when asked."""
    from opconvex import linalg

    try:
        rows, cols = int(obj['rows']), int(obj['cols'])
        re = np.array(obj['re'], dtype=float)
        im = np.array(obj.get('im', np.zeros((rows, cols))), dtype=float)
    except (KeyError, TypeError, ValueError) as ex:
        raise SerializationError('malformed matrix JSON: %s' % (ex,))
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise SerializationError('matrix JSON declares %dx%d but holds %s'
                                 % (rows, cols, re.shape))
    m = re + 1j * im
    if hermitian:
        return linalg.hermitian(m, tol)
    return linalg.general_matrix(m)


def to_jsonable(obj):
    """Recursively convert arrays, dataclasses and numpy scalars for json."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': float(obj.real), 'im': float(obj.imag)}
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2 or np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if hasattr(obj, 'to_json'):
        return obj.to_json()
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise SerializationError('cannot serialize %s' % (type(obj).__name__,))


def load_json(path):
    try:
        with open(path) as fin:
            return json.load(fin)
    except OSError as ex:
        raise SerializationError('cannot read %s: %s' % (path, ex))
    except ValueError as ex:
        raise SerializationError('%s is not valid JSON: %s' % (path, ex))


def load_matrix(path, hermitian=False, tol=None):
    return matrix_from_json(load_json(path), hermitian, tol)


def dump_json(obj, path=None):
    """Write obj as indented JSON to path, or to stdout when path is None."""
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
    if path is None:
        sys.stdout.write(text + '\n')
        return text
    try:
        with open(path, 'w') as fout:
            fout.write(text + '\n')
    except OSError as ex:
        raise SerializationError('cannot write %s: %s' % (path, ex))
    return text


def parse_floats(text):
    """'1,2.5,3' -> (1.0, 2.5, 3.0)"""
    try:
        values = tuple(float(v) for v in text.split(',') if v.strip())
    except (AttributeError, ValueError):
        raise ConfigError('expected comma separated numbers, got %r' % (text,))
    if not values:
        raise ConfigError('expected at least one number')
    return values


def parse_dims(text):
    """'3x3' -> (3, 3); '4' -> (4,)"""
    try:
        dims = tuple(int(v) for v in str(text).lower().split('x'))
    except ValueError:
        raise ConfigError('dims must look like 3x3, got %r' % (text,))
    if not dims or any(d < 1 for d in dims):
        raise ConfigError('dims must be positive, got %r' % (text,))
    return dims


def parse_range(text):
    """'0:1.4:0.1' -> values from 0 to 1.4 inclusive in steps of 0.1."""
    try:
        start, stop, step = (float(v) for v in text.split(':'))
    except ValueError:
        raise ConfigError('range must look like start:stop:step, got %r'
                          % (text,))
    if step <= 0 or stop < start:
        raise ConfigError('empty range %r' % (text,))
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def parse_sweep_grid(text):
    """'p=0:1.4:0.1,q=0:1.4:0.1' -> {'p': (...), 'q': (...)}"""
    axes = {}
    for part in text.split(','):
        name, sep, spec = part.partition('=')
        if not sep:
            raise ConfigError('sweep axis must look like p=start:stop:step')
        axes[name.strip()] = parse_range(spec)
    if set(axes) != {'p', 'q'}:
        raise ConfigError('sweep grid needs exactly the axes p and q')
    return axes
