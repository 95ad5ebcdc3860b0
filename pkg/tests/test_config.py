#
# Run with py.test
#
import argparse
import json
import os
import sys

import pytest

# Import from repo instead of site-packages.
parentdir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parentdir)

from opconvex import config
from opconvex.errors import ConfigError


def namespace(**kw):
    values = dict.fromkeys(config.CONFIG_KEYS)
    values['quiet'] = values['verbose'] = False
    values.update(kw)
    return argparse.Namespace(**values)


class TestTolerances(object):

    def test_defaults(self):
        tol = config.DEFAULT_TOLERANCES
        assert tol.psd_tol == 1e-10
        assert tol.dd_tol == 1e-7
        assert tol.max_resamples == 50
        assert config.resolve(None) is tol

    def test_negative(self):
        with pytest.raises(ConfigError, match='non-negative'):
            config.Tolerances(psd_tol=-1.0)

    def test_caps(self):
        with pytest.raises(ConfigError):
            config.Tolerances(jacobi_max_sweeps=0)

    def test_replace(self):
        tol = config.DEFAULT_TOLERANCES.replace(violation_tol=1e-6)
        assert tol.violation_tol == 1e-6
        assert config.DEFAULT_TOLERANCES.violation_tol == 1e-9

    def test_from_json(self):
        tol = config.tolerances_from_json({'tensor_cap': 64})
        assert tol.tensor_cap == 64
        assert tol.psd_tol == config.DEFAULT_TOLERANCES.psd_tol
        assert config.tolerances_from_json(None) is config.DEFAULT_TOLERANCES
        assert tol.to_json()['tensor_cap'] == 64

    def test_from_json_errors(self):
        with pytest.raises(ConfigError, match='unknown tolerance'):
            config.tolerances_from_json({'eps': 1.0})
        with pytest.raises(ConfigError):
            config.tolerances_from_json([1.0])


class TestLoadConfig(object):

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError, match='not found'):
            config.load_config(str(tmp_path / 'nothing.json'))

    def test_bad_json(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{seed: 1')
        with pytest.raises(ConfigError, match='not valid JSON'):
            config.load_config(str(path))

    def test_unknown_key(self, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'seed': 1, 'colour': 'blue'}))
        with pytest.raises(ConfigError, match='colour'):
            config.load_config(str(path))

    def test_read(self, tmp_path):
        path = tmp_path / 'cfg.json'
        path.write_text(json.dumps({'seed': 7, 'trials': 30,
                                    'tolerances': {'psd_tol': 1e-8}}))
        cfg = config.load_config(str(path))
        assert cfg['seed'] == 7
        assert cfg['tolerances'] == {'psd_tol': 1e-8}


class TestMergeConfig(object):

    def test_command_line_wins(self):
        merged = config.merge_config({'seed': 3, 'trials': 10, 'threads': 2},
                                     namespace(trials=50))
        assert merged['seed'] == 3
        assert merged['trials'] == 50
        assert merged['threads'] == 2
        assert isinstance(merged['tolerances'], config.Tolerances)

    def test_file_tolerances(self):
        merged = config.merge_config({'tolerances': {'psd_tol': 1e-8}},
                                     namespace())
        assert merged['tolerances'].psd_tol == 1e-8

    def test_defaults(self):
        merged = config.merge_config(None, namespace(threads=1))
        assert merged['seed'] == 0
        assert merged['trials'] is None
        assert merged['tolerances'] is config.DEFAULT_TOLERANCES

    def test_bad_seed(self):
        with pytest.raises(ConfigError, match='seed'):
            config.merge_config({'seed': -1}, namespace(threads=1))
        with pytest.raises(ConfigError, match='seed'):
            config.merge_config({'seed': 'x'}, namespace(threads=1))

    def test_bad_trials(self):
        with pytest.raises(ConfigError, match='trials'):
            config.merge_config({'trials': 0}, namespace(threads=1))


class TestThreadCount(object):

    def test_unset(self):
        assert config.thread_count({}) == 1
        assert config.thread_count({config.THREADS_ENV: ' '}) == 1

    def test_value(self):
        assert config.thread_count({config.THREADS_ENV: '4'}) == 4

    def test_bad(self):
        with pytest.raises(ConfigError, match='integer'):
            config.thread_count({config.THREADS_ENV: 'many'})
        with pytest.raises(ConfigError, match='positive'):
            config.thread_count({config.THREADS_ENV: '0'})
