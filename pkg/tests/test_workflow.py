import json
import os

import numpy as np
import pytest

from app import main
from services import artifact_store as names
from services.artifact_store import ArtifactStore
from services.errors import ConfigError
from services.pipeline_config import load_config
from services.workflow import WorkflowOrchestrator


FAST_FLAGS = ['--max-outer', '30', '--max-admm', '3', '--max-inner', '5']

GROUPS = [
    ['signal', 'failure', 'delay', 'platform', 'train'],
    ['crowding', 'rush', 'packed', 'carriage', 'commute'],
    ['fare', 'ticket', 'app', 'refund', 'gate'],
]


def corpus_flags(mini_corpus_path, stop_words_path, out_dir):
    return ['--input', mini_corpus_path, '--stop-words', stop_words_path, '--out-dir', str(out_dir)]


def write_planted_corpus(path, n_true=99, n_noise=401, seed=0):
    """Three word groups in well-engaged posts plus zero-engagement posts chaining every group together"""
    rng = np.random.default_rng(seed)
    interleaved = [GROUPS[g][i] for i in range(5) for g in range(3)]
    with open(path, 'w', encoding='utf-8') as handle:
        for i in range(n_true):
            words = list(rng.permutation(GROUPS[i % 3]))
            handle.write(json.dumps({'post_id': f"user{i}", 'timestamp': '2024-03-04T08:00:00Z',
                                     'text': ' '.join(words), 'likes': 20, 'comments': 5,
                                     'followers': 100}) + '\n')
        for i in range(n_noise):
            handle.write(json.dumps({'post_id': f"noise{i}", 'timestamp': '2024-03-04T08:00:00Z',
                                     'text': ' '.join(interleaved), 'likes': 0, 'comments': 0,
                                     'followers': 0}) + '\n')
    return str(path)


class TestCommandLine:
    def test_all_is_deterministic(self, tmp_path, mini_corpus_path, stop_words_path):
        outputs = []
        for name in ('first', 'second'):
            out_dir = tmp_path / name
            argv = ['all'] + corpus_flags(mini_corpus_path, stop_words_path, out_dir) + \
                ['--k', '3', '--seed', '7'] + FAST_FLAGS
            assert main(argv) == 0
            outputs.append(out_dir)

        first, second = outputs
        produced = sorted(os.listdir(first))
        assert produced == sorted(os.listdir(second))
        for artifact in (names.POSTS, names.TOKENS, names.VOCAB, names.WEIGHTS, names.EDGES,
                         names.MODEL, names.TRACE, names.TOPICS, names.EVENTS, names.ASSIGNMENTS, names.REPORT):
            assert artifact in produced

        for artifact in produced:
            if artifact == names.RUN_MANIFEST:
                continue
            assert (first / artifact).read_bytes() == (second / artifact).read_bytes(), artifact

        manifests = []
        for out_dir in outputs:
            manifest = json.loads((out_dir / names.RUN_MANIFEST).read_text(encoding='utf-8'))
            manifest.pop('metadata')
            manifest['config'].pop('out_dir')
            manifests.append(manifest)
        assert manifests[0] == manifests[1]
        assert manifests[0]['stages'] == ['ingest', 'weights', 'graph', 'fit', 'report']

    def test_report_contents(self, tmp_path, mini_corpus_path, stop_words_path):
        argv = ['all'] + corpus_flags(mini_corpus_path, stop_words_path, tmp_path) + ['--k', '3'] + FAST_FLAGS
        assert main(argv) == 0

        store = ArtifactStore(str(tmp_path))
        report = store.read_json(names.REPORT)
        assert report['K'] == 3
        assert len(report['topics']) == 3
        assert -1.0 <= report['metrics']['npmi'] <= 1.0
        assert 0.0 < report['metrics']['td'] <= 1.0
        importances = [t['importance'] for t in report['topics']]
        assert importances == sorted(importances, reverse=True)

        assignments = store.read_table(names.ASSIGNMENTS, dtype={'post_id': str})
        assert len(assignments) == 12
        assert set(assignments['dominant_topic']) <= {-1, 0, 1, 2}

        stats = store.read_json(names.CORPUS_STATS)
        assert stats['posts'] == 12
        assert stats['vocabulary'] == 36

    def test_stage_without_its_inputs(self, tmp_path, mini_corpus_path, stop_words_path, capsys):
        assert main(['ingest'] + corpus_flags(mini_corpus_path, stop_words_path, tmp_path)) == 0
        capsys.readouterr()

        assert main(['fit', '--out-dir', str(tmp_path), '--k', '3']) == 3
        assert "run `graph` first" in capsys.readouterr().err
        assert not (tmp_path / names.MODEL).exists()

    def test_corrupted_artifacts_exit_with_data_error(self, tmp_path, mini_corpus_path, stop_words_path):
        argv = ['all'] + corpus_flags(mini_corpus_path, stop_words_path, tmp_path) + ['--k', '3'] + FAST_FLAGS
        assert main(argv) == 0

        edges = tmp_path / names.EDGES
        header, table = edges.read_text(encoding='utf-8').split('\n', 1)
        edges.write_text(header + '\n' + table.replace('\tweight', '\tmass', 1), encoding='utf-8')
        assert main(['fit', '--out-dir', str(tmp_path), '--k', '3'] + FAST_FLAGS) == 3

        tokens = tmp_path / names.TOKENS
        tokens.write_text(tokens.read_text(encoding='utf-8') + '{"post_id": "broken", "tok\n', encoding='utf-8')
        assert main(['graph', '--out-dir', str(tmp_path)]) == 3

    def test_ingest_without_input(self, tmp_path):
        assert main(['ingest', '--out-dir', str(tmp_path)]) == 2

    def test_bad_preset_flag(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(['fit', '--out-dir', str(tmp_path), '--preset', 'no-u'])
        assert excinfo.value.code == 2

    def test_invalid_k(self, tmp_path):
        assert main(['fit', '--out-dir', str(tmp_path), '--k', '0']) == 2

    def test_sweep_selects_from_list(self, tmp_path, mini_corpus_path, stop_words_path):
        argv = ['all'] + corpus_flags(mini_corpus_path, stop_words_path, tmp_path) + \
            ['--k-list', '2,3', '--m', '5'] + FAST_FLAGS
        assert main(argv) == 0

        store = ArtifactStore(str(tmp_path))
        table = store.read_table(names.SWEEP_TABLE, sep=',')
        assert list(table['K']) == [2, 3]
        selection = store.read_json(names.SWEEP_SELECTION)
        assert selection['selected_k'] in (2, 3)
        assert store.read_model().K == selection['selected_k']
        manifest = store.read_json(names.RUN_MANIFEST)
        assert manifest['stages'] == ['ingest', 'weights', 'graph', 'sweep', 'report']


class TestAblation:
    def test_influence_weights_filter_noise(self, tmp_path):
        corpus = write_planted_corpus(tmp_path / 'planted.jsonl')
        config = load_config(overrides={
            'INPUT': corpus, 'OUT_DIR': str(tmp_path / 'out'), 'K': 3, 'M': 5, 'REFERENCE': 'posts',
            'SEED': 0, 'MAX_OUTER': 100, 'MAX_ADMM': 5, 'MAX_INNER': 10, 'RESTARTS': 3,
        })
        orchestrator = WorkflowOrchestrator(config)
        orchestrator.execute('ingest')
        orchestrator.execute('weights')

        presets = ['full', 'no-gamma', 'no-weights', 'plain-graph']
        result = orchestrator.run_ablate(presets)
        rows = {row['preset']: row for row in result['rows']}
        assert rows['full']['td'] == pytest.approx(1.0)
        assert rows['full']['npmi'] == pytest.approx(1.0, abs=1e-6)
        assert rows['no-gamma']['td'] >= rows['full']['td'] - 1e-12
        assert rows['no-weights']['npmi'] < rows['full']['npmi']
        assert rows['plain-graph']['npmi'] < rows['full']['npmi']

        table = ArtifactStore(config.out_dir).read_table(names.ABLATION, sep=',')
        assert list(table['preset']) == presets

    def test_requires_full_base_preset(self, tmp_path):
        config = load_config(overrides={'OUT_DIR': str(tmp_path), 'PRESET': 'no-gamma'})
        with pytest.raises(ConfigError):
            WorkflowOrchestrator(config).validate('ablate')

    @pytest.mark.parametrize('overrides', [{'USE_WEIGHTS': False}, {'GAMMA': 0.0}, {'NO_H': True}])
    def test_requires_unablated_base_model(self, tmp_path, overrides):
        config = load_config(overrides={'OUT_DIR': str(tmp_path), **overrides})
        with pytest.raises(ConfigError, match='full model'):
            WorkflowOrchestrator(config).validate('ablate')

    def test_no_weights_flag_exits_with_config_error(self, tmp_path, capsys):
        assert main(['ablate', '--out-dir', str(tmp_path), '--no-weights']) == 2
        assert 'USE_WEIGHTS=false' in capsys.readouterr().err
