import os

import pytest

from conftest import ROOT
from services.errors import ConfigError
from services.pipeline_config import DEFAULT_K_LIST, apply_preset, load_config


def write_config(tmp_path, text):
    path = tmp_path / 'config.env'
    path.write_text(text, encoding='utf-8')
    return str(path)


class TestLoadConfig:
    def test_defaults(self):
        config = load_config()
        assert config.solver.K == 10
        assert config.solver.lambda_h is None
        assert config.solver.gamma == 0.1
        assert config.graph.salience == 'capped_idf'
        assert config.graph.use_weights
        assert config.metrics.m == 10
        assert config.preset == 'full'
        assert config.sweep_k_values() == list(DEFAULT_K_LIST)

    def test_overrides_beat_file(self, tmp_path):
        path = write_config(tmp_path, "K=5\nSEED=3\nGAMMA=0.2\n")
        config = load_config(path, {'K': 4})
        assert config.solver.K == 4
        assert config.seed == 3
        assert config.solver.gamma == 0.2

    def test_lowercase_override_keys(self):
        assert load_config(overrides={'max_outer': '12'}).solver.max_outer == 12

    def test_auto_lambda(self, tmp_path):
        path = write_config(tmp_path, "LAMBDA_H=auto\n")
        assert load_config(path).solver.lambda_h is None
        assert load_config(overrides={'LAMBDA_H': '0.5'}).solver.lambda_h == 0.5

    def test_boolean_and_list_values(self, tmp_path):
        path = write_config(tmp_path, "USE_WEIGHTS=false\nK_LIST=2, 3,5\nSHARPNESS_M=5\n")
        config = load_config(path)
        assert not config.graph.use_weights
        assert config.k_list == [2, 3, 5]
        assert config.metrics.sharpness_m == (5,)

    def test_example_file(self):
        config = load_config(os.path.join(ROOT, 'config.env.example'))
        assert config.solver.K == 3
        assert config.seed == 7
        assert config.k_list == [2, 3, 4]
        assert config.metrics.m == 5
        assert config.input_path == 'data/mini_corpus.jsonl'


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / 'absent.env'))

    def test_unknown_file_key(self, tmp_path):
        path = write_config(tmp_path, "K=3\nTOPICS=4\n")
        with pytest.raises(ConfigError, match='TOPICS'):
            load_config(path)

    def test_unknown_override_key(self):
        with pytest.raises(ConfigError):
            load_config(overrides={'TOPICS': 4})

    def test_uncastable_value(self):
        with pytest.raises(ConfigError, match='MAX_OUTER'):
            load_config(overrides={'MAX_OUTER': 'many'})

    def test_bad_boolean(self):
        with pytest.raises(ConfigError):
            load_config(overrides={'USE_WEIGHTS': 'maybe'})

    @pytest.mark.parametrize('overrides', [
        {'K': 0},
        {'GAMMA': -1},
        {'REFERENCE': 'wikipedia'},
        {'MISSING_WORDS': 'ignore'},
        {'TD_FLOOR': 1.5},
        {'K_LIST': '0,2'},
        {'N_KEYWORDS': 0},
    ])
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            load_config(overrides=overrides)


class TestPresets:
    def test_no_h(self):
        assert load_config(overrides={'PRESET': 'no-h'}).solver.freeze_h

    def test_no_gamma(self):
        assert load_config(overrides={'PRESET': 'no-gamma'}).solver.gamma == 0.0

    def test_no_weights(self):
        config = load_config(overrides={'PRESET': 'no-weights'})
        assert not config.graph.use_weights
        assert config.graph.salience == 'capped_idf'

    def test_plain_graph(self):
        config = load_config(overrides={'PRESET': 'plain-graph', 'BOOST': 'data/domain_boost.txt'})
        assert not config.graph.use_weights
        assert config.graph.salience == 'unit'
        assert config.graph.boost_path is None

    def test_preset_applied_after_file(self, tmp_path):
        path = write_config(tmp_path, "GAMMA=0.3\nPRESET=no-gamma\n")
        assert load_config(path).solver.gamma == 0.0

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_config(overrides={'PRESET': 'no-u'})
        with pytest.raises(ConfigError):
            apply_preset(load_config(), 'no-u')
