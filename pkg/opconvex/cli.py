"""
Command line front end.

    opconvex suite {all,funcalc,means,domain,hessian,certify}
    opconvex certify --target trace --function pow:0.5,0.5 --dims 3x3
    opconvex sweep --grid p=0:1.4:0.1,q=0:1.4:0.1 --dims 3x3
    opconvex hessian --function frac:1,1 --grid grid.json --mode nsd
    opconvex domain --mu 1,1 --point 0.5,0.5
    opconvex means --a a.json --b b.json
    opconvex repro {t2,harmonic,gm-commuting}

Every command writes one JSON document to stdout, or to --out.  Progress and
the effective settings go to stderr.  The exit status is 0 when every
contract held, 1 when one failed or an error occurred, and 2 for usage
errors.

"""
import argparse
import logging
import sys

import numpy as np

__version__ = '1.0.0'

log = logging.getLogger('opconvex')

_handler = None


def _configure_logging(quiet, verbose):
    global _handler
    if _handler is not None:
        log.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter('===> %(message)s'))
    log.addHandler(_handler)
    if quiet:
        log.setLevel(logging.WARNING)
    elif verbose:
        log.setLevel(logging.DEBUG)
    else:
        log.setLevel(logging.INFO)


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='file',
                        help='JSON configuration file; flags override it.')
    common.add_argument('--out', '-o', metavar='file',
                        help='Write the JSON report to file instead of '
                        'stdout.')
    common.add_argument('--quiet', '-q', action='store_true',
                        help='Do not print any messages other than errors.')
    common.add_argument('--seed', type=int, metavar='n',
                        help='Master random seed (default 0).')
    common.add_argument('--threads', type=int, metavar='n',
                        help='Worker threads for trials (default '
                        '$OPCONVEX_THREADS or 1).')
    common.add_argument('--trials', type=int, metavar='n',
                        help='Number of randomized trials.')
    common.add_argument('--verbose', '-v', action='store_true',
                        help='Print per-trial debugging messages.')
    return common


def _build_parser(prg):
    from opconvex import suite

    common = _common_options()
    ap = argparse.ArgumentParser(
        prog=prg, description='Numerical checks of operator convexity and '
        'concavity for matrix functional calculi.')
    ap.add_argument('--version', action='version', version=__version__)
    sub = ap.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('suite', parents=[common],
                       help='Run an acceptance battery.')
    p.add_argument('name', choices=suite.SUITE_CHOICES,
                   help='Battery to run.')

    p = sub.add_parser('certify', parents=[common],
                       help='Certify midpoint convexity of one map.')
    p.add_argument('--target', required=True,
                   help='tensor, trace, quadratic, integral, two_of_three, '
                   'lieb_ruskai or tensor_quadratic.')
    p.add_argument('--function', '-f', metavar='spec',
                   help='Function, e.g. pow:0.5,0.5 or frac:1,1.')
    p.add_argument('--dims', default='3x3', help='Matrix orders, e.g. 3x3.')
    p.add_argument('--window', action='append', metavar='lo,hi',
                   help='Eigenvalue window; repeat once per variable.')
    p.add_argument('--direction', choices=('convex', 'concave'),
                   help='Direction to certify (default by target).')
    p.add_argument('--frozen', choices=('A', 'B', 'K'),
                   help='Slot held fixed (integral, two_of_three).')
    p.add_argument('--u', type=float, default=1.0,
                   help='Shift of A for two_of_three.')
    p.add_argument('--v', type=float, default=1.0,
                   help='Shift of B for two_of_three.')
    p.add_argument('--nodes', type=int, default=20,
                   help='Quadrature nodes for the integral target.')
    p.add_argument('--expect', choices=('consistent', 'violation'),
                   default='consistent', help='Outcome that counts as '
                   'success (default consistent).')
    p.add_argument('--scalar-seeded', action='store_true',
                   help='Search 1x1 instances before the requested dims.')

    p = sub.add_parser('sweep', parents=[common],
                       help='Lieb concavity over a grid of exponents.')
    p.add_argument('--grid', required=True,
                   help='Exponent grid, e.g. p=0:1.4:0.1,q=0:1.4:0.1.')
    p.add_argument('--dims', default='3x3', help='Matrix orders, e.g. 3x3.')
    p.add_argument('--no-scalar-seed', action='store_false',
                   dest='scalar_seeded',
                   help='Do not search 1x1 instances first.')

    p = sub.add_parser('hessian', parents=[common],
                       help='Scan the generalized Hessians of a grid.')
    p.add_argument('--function', '-f', required=True, metavar='spec',
                   help='Function, e.g. frac:1,1 or recip:1,1.')
    p.add_argument('--grid', required=True, metavar='file',
                   help='Grid JSON {"nodes": [[...], [...]]}.')
    p.add_argument('--mode', choices=('psd', 'nsd'), default='psd',
                   help='Semi-definiteness to require (default psd).')

    p = sub.add_parser('domain', parents=[common],
                       help='Membership of a point in D_k(mu).')
    p.add_argument('--mu', required=True, help='Comma separated mu values.')
    p.add_argument('--point', required=True,
                   help='Comma separated coordinates.')

    p = sub.add_parser('means', parents=[common],
                       help='Geometric and harmonic means of two matrices.')
    p.add_argument('--a', required=True, metavar='file',
                   help='Matrix JSON for A.')
    p.add_argument('--b', required=True, metavar='file',
                   help='Matrix JSON for B.')

    p = sub.add_parser('repro', parents=[common],
                       help='Reproduce a closed-form instance.')
    p.add_argument('instance', choices=('t2', 'harmonic', 'gm-commuting'))
    p.add_argument('--eps', type=float, default=0.0,
                   help='Perturbation for t2 (default 0).')
    return ap


def _windows(values):
    from opconvex import matrixio
    from opconvex.errors import ConfigError

    if not values:
        return None
    out = []
    for text in values:
        lo_hi = matrixio.parse_floats(text)
        if len(lo_hi) != 2:
            raise ConfigError('window must look like lo,hi: %r' % (text,))
        out.append(lo_hi)
    return tuple(out)


def cmd_suite(args, cfg):
    from opconvex import suite

    return suite.run_suite(args.name, cfg['seed'], cfg['out'], cfg['threads'],
                           cfg['tolerances'], cfg['trials'])


def cmd_certify(args, cfg):
    from opconvex import funcalc, matrixio
    from opconvex.certify import maps, theorems

    f = funcalc.parse_function_spec(args.function) if args.function else None
    target = maps.TARGET_ALIASES.get(args.target, args.target)
    params = {}
    if target == maps.TWO_OF_THREE:
        params = {'u': args.u, 'v': args.v}
    elif target == maps.INTEGRAL_FORM:
        nodes, weights = theorems.lieb_quadrature(args.nodes)
        params = {'nodes': nodes, 'weights': weights}
    spec = maps.MapSpec(target, f, matrixio.parse_dims(args.dims),
                        _windows(args.window), args.frozen, args.direction,
                        params)
    trials = cfg['trials'] or 1000
    log.info('map: %s', spec.describe())
    log.info('direction: %s', spec.direction)
    log.info('windows: %s', spec.windows)
    log.info('trials: %d', trials)
    if args.scalar_seeded:
        report = maps.find_violation(spec, trials, cfg['seed'], cfg['threads'],
                                     tol=cfg['tolerances'])
    else:
        report = maps.certify(spec, trials, cfg['seed'], cfg['threads'],
                              tol=cfg['tolerances'])
    doc = report.to_json()
    doc['config'] = {'seed': cfg['seed'], 'trials': trials,
                     'threads': cfg['threads'], 'spec': spec.to_json(),
                     'tolerances': cfg['tolerances'].to_json()}
    matrixio.dump_json(doc, cfg['out'])
    return 0 if report.violated == (args.expect == 'violation') else 1


def cmd_sweep(args, cfg):
    from opconvex import matrixio
    from opconvex.certify import theorems

    grid = matrixio.parse_sweep_grid(args.grid)
    dims = matrixio.parse_dims(args.dims)
    trials = cfg['trials'] or 500
    log.info('grid: %d x %d cells', len(grid['p']), len(grid['q']))
    log.info('dims: %s', 'x'.join(str(d) for d in dims))
    log.info('trials per cell: %d', trials)
    cells = theorems.lieb_sweep(grid, dims, trials, cfg['seed'],
                                cfg['threads'], args.scalar_seeded,
                                cfg['tolerances'])
    rows = []
    ok = True
    for (p, q), report in cells.items():
        expected = None
        if p + q <= 1.0 + 1e-12:
            expected = 'consistent'
            ok = ok and report.consistent
        elif p + q >= 1.2 - 1e-12:
            expected = 'violation'
            ok = ok and report.violated
        rows.append({'p': p, 'q': q, 'verdict': report.verdict,
                     'worst_margin': report.worst_margin,
                     'trials': report.trials, 'expected': expected})
    matrixio.dump_json({'seed': cfg['seed'], 'dims': dims, 'cells': rows},
                       cfg['out'])
    return 0 if ok else 1


def cmd_hessian(args, cfg):
    from opconvex import funcalc, hessian, matrixio

    f = funcalc.parse_function_spec(args.function)
    grid = hessian.DataSetGrid.from_json(matrixio.load_json(args.grid))
    log.info('function: %s', f.describe())
    log.info('grid order: %s', grid.order)
    log.info('mode: %s', args.mode)
    report = hessian.hessian_scan(f, grid, args.mode, cfg['tolerances'])
    doc = {'verdict': 'FAIL' if report.violated else 'PASS',
           'worst_index': report.details['worst_index'],
           'worst_eigenvalue': report.details['worst_eigenvalue'],
           'per_index': report.details['per_index']}
    if 'membership' in report.details:
        doc['membership'] = report.details['membership']
    matrixio.dump_json(doc, cfg['out'])
    return 1 if report.violated else 0


def cmd_domain(args, cfg):
    from opconvex import domain, matrixio

    d = domain.DomainSpec.of(*matrixio.parse_floats(args.mu))
    point = matrixio.parse_floats(args.point)
    log.info('mu: %s', d.mu)
    log.info('point: %s', point)
    result = domain.domain_contains(d, point, cfg['tolerances'])
    matrixio.dump_json(result.to_json(), cfg['out'])
    return 0


def _means_doc(a, b, tol):
    from opconvex import means

    return {'geometric_mean': means.geometric_mean(a, b, tol),
            'harmonic_mean': means.harmonic_mean(a, b, tol),
            'block_margin': means.gm_block_margin(a, b, tol),
            'harmonic_block_margin': means.harmonic_block_check(a, b, tol)}


def cmd_means(args, cfg):
    from opconvex import matrixio

    tol = cfg['tolerances']
    a = matrixio.load_matrix(args.a, hermitian=True, tol=tol)
    b = matrixio.load_matrix(args.b, hermitian=True, tol=tol)
    log.info('A: %dx%d from %s', a.shape[0], a.shape[1], args.a)
    log.info('B: %dx%d from %s', b.shape[0], b.shape[1], args.b)
    matrixio.dump_json(_means_doc(a, b, tol), cfg['out'])
    return 0


def cmd_repro(args, cfg):
    from opconvex import matrixio
    from opconvex.certify import theorems

    tol = cfg['tolerances']
    log.info('instance: %s', args.instance)
    if args.instance == 't2':
        log.info('eps: %g', args.eps)
        margin = theorems.t2_counterexample(args.eps, tol)
        # Closed form of the midpoint gap for the shifted projections.
        expected = -0.0625 - args.eps / 4.0 + args.eps ** 2 / 2.0
        doc = {'id': 't2_counterexample', 'eps': args.eps, 'margin': margin,
               'expected_margin': expected, 'violated': margin < 0}
        ok = abs(margin - expected) <= 1e-10
    elif args.instance == 'harmonic':
        doc = _means_doc(np.array([[1.0]]), np.array([[3.0]]), tol)
        doc['id'] = 'harmonic_scalars'
        ok = abs(doc['harmonic_mean'][0, 0] - 1.5) <= 1e-12 and \
            doc['harmonic_block_margin'] >= -1e-12
    else:
        doc = _means_doc(np.diag([4.0, 1.0]), np.diag([9.0, 1.0]), tol)
        doc['id'] = 'gm_commuting'
        ok = float(np.max(np.abs(doc['geometric_mean']
                                 - np.diag([6.0, 1.0])))) <= 1e-10
    doc['passed'] = bool(ok)
    matrixio.dump_json(doc, cfg['out'])
    return 0 if ok else 1


_COMMANDS = {'suite': cmd_suite, 'certify': cmd_certify, 'sweep': cmd_sweep,
             'hessian': cmd_hessian, 'domain': cmd_domain, 'means': cmd_means,
             'repro': cmd_repro}


def main(prg=None, argv=None):
    from opconvex import config
    from opconvex.errors import OpConvexError

    ap = _build_parser(prg)
    args = ap.parse_args(argv)
    _configure_logging(args.quiet, args.verbose)
    try:
        file_cfg = config.load_config(args.config) if args.config else None
        cfg = config.merge_config(file_cfg, args)
        _configure_logging(cfg['quiet'], cfg['verbose'])
        log.info('command: %s', args.command)
        log.info('seed: %d', cfg['seed'])
        log.info('threads: %d', cfg['threads'])
        log.info('out: %s', cfg['out'] or '<stdout>')
        return _COMMANDS[args.command](args, cfg)
    except OpConvexError as ex:
        print(ex, file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError) as ex:
        print('%s failed: %s: %s' % (args.command, type(ex).__name__, ex),
              file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
