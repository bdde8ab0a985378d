"""
Artifact Store
Reads and writes the versioned on-disk artifacts that chain pipeline stages together
"""
import json
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DataError, MissingArtifactError
from .graph_builder import CooccurrenceGraph
from .influence_service import InfluenceWeight
from .logger import get_logger
from .pdf_solver import FactorModel, FitTrace
from .post_loader import Post, record_to_post
from .text_cleaner import TokenizedPost, Vocabulary


SCHEMA_VERSION = 1

POSTS = 'posts.jsonl'
TOKENS = 'tokens.jsonl'
VOCAB = 'vocab.txt'
CORPUS_STATS = 'corpus_stats.json'
WEIGHTS = 'weights.tsv'
EDGES = 'edges.tsv'
GRAPH_SUMMARY = 'graph.json'
MODEL = 'model.json'
TRACE = 'trace.csv'
SWEEP_TABLE = 'sweep.csv'
SWEEP_SELECTION = 'sweep.json'
TOPICS = 'topics.tsv'
EVENTS = 'events.tsv'
ASSIGNMENTS = 'assignments.tsv'
REPORT = 'report.json'
ABLATION = 'ablation.csv'
RUN_MANIFEST = 'run.json'

# Artifact -> stage that produces it
PRODUCERS = {
    POSTS: 'ingest', TOKENS: 'ingest', VOCAB: 'ingest', CORPUS_STATS: 'ingest',
    WEIGHTS: 'weights',
    EDGES: 'graph', GRAPH_SUMMARY: 'graph',
    MODEL: 'fit', TRACE: 'fit',
    SWEEP_TABLE: 'sweep', SWEEP_SELECTION: 'sweep',
    TOPICS: 'report', EVENTS: 'report', ASSIGNMENTS: 'report', REPORT: 'report',
    ABLATION: 'ablate',
}

WEIGHT_COLUMNS = ['post_id', 'itf', 'iidf', 'Y', 'mean_gap_hours', 'adjusted', 'w', 'pacing_imputed']
EDGE_COLUMNS = ['i', 'j', 'word_i', 'word_j', 'weight']


class ArtifactStore:
    def __init__(self, out_dir: str):
        """
        Initialize artifact store

        Args:
            out_dir: Directory holding every stage's outputs
        """
        self.out_dir = out_dir
        self.logger = get_logger()

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def exists(self, name: str) -> bool:
        return os.path.exists(self.path(name))

    def require(self, name: str, stage: Optional[str] = None):
        """Raise MissingArtifactError naming the stage to run first when `name` is absent"""
        if not self.exists(name):
            raise MissingArtifactError(name, stage or PRODUCERS.get(name, 'ingest'))

    def _header(self, name: str) -> str:
        return f"# schema_version={SCHEMA_VERSION} artifact={name}\n"

    def _open_for_write(self, name: str):
        os.makedirs(self.out_dir, exist_ok=True)
        return open(self.path(name), 'w', encoding='utf-8', newline='')

    def _check_header(self, name: str, line: str):
        expected = self._header(name).strip()
        if line.strip() != expected:
            raise DataError(f"Artifact {name} has an unexpected header {line.strip()!r} (expected {expected!r})")

    # Tables

    def write_table(self, name: str, frame: pd.DataFrame, sep: str = '\t') -> str:
        with self._open_for_write(name) as handle:
            handle.write(self._header(name))
            frame.to_csv(handle, sep=sep, index=False, lineterminator='\n')
        return self.path(name)

    def read_table(self, name: str, sep: str = '\t', dtype: Optional[Dict[str, Any]] = None) -> pd.DataFrame:
        self.require(name)
        with open(self.path(name), encoding='utf-8', newline='') as handle:
            self._check_header(name, handle.readline())
            return pd.read_csv(handle, sep=sep, dtype=dtype, keep_default_na=False)

    # JSON documents

    def write_json(self, name: str, payload: Dict[str, Any]) -> str:
        document = {'schema_version': SCHEMA_VERSION, **payload}
        with self._open_for_write(name) as handle:
            json.dump(document, handle, indent=2, sort_keys=True, ensure_ascii=False)
            handle.write('\n')
        return self.path(name)

    def read_json(self, name: str) -> Dict[str, Any]:
        self.require(name)
        with open(self.path(name), encoding='utf-8') as handle:
            try:
                document = json.load(handle)
            except json.JSONDecodeError as e:
                raise DataError(f"Artifact {name} is not valid JSON: {e.msg}")
        if document.get('schema_version') != SCHEMA_VERSION:
            raise DataError(f"Artifact {name} has schema_version {document.get('schema_version')}, "
                            f"expected {SCHEMA_VERSION}")
        return document

    # JSON lines

    def _write_jsonl(self, name: str, records: List[Dict[str, Any]]) -> str:
        with self._open_for_write(name) as handle:
            handle.write(self._header(name))
            for record in records:
                handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + '\n')
        return self.path(name)

    def _read_jsonl(self, name: str) -> List[Tuple[int, Dict[str, Any]]]:
        self.require(name)
        rows = []
        with open(self.path(name), encoding='utf-8') as handle:
            self._check_header(name, handle.readline())
            for line_number, line in enumerate(handle, 2):
                if not line.strip():
                    continue
                try:
                    rows.append((line_number, json.loads(line)))
                except json.JSONDecodeError as e:
                    raise DataError(f"Artifact {name} line {line_number} is not valid JSON: {e.msg}")
        return rows

    # Corpus

    def write_posts(self, posts: List[Post]) -> str:
        return self._write_jsonl(POSTS, [p.to_record() for p in posts])

    def read_posts(self) -> List[Post]:
        return [record_to_post(record, line) for line, record in self._read_jsonl(POSTS)]

    def write_tokens(self, posts: List[TokenizedPost]) -> str:
        return self._write_jsonl(TOKENS, [{'post_id': p.post_id, 'tokens': p.tokens} for p in posts])

    def read_tokens(self) -> List[TokenizedPost]:
        posts = []
        for line, record in self._read_jsonl(TOKENS):
            if not isinstance(record, dict) or 'post_id' not in record or not isinstance(record.get('tokens'), list):
                raise DataError(f"Artifact {TOKENS} line {line} needs post_id and a tokens list")
            posts.append(TokenizedPost(post_id=record['post_id'], tokens=list(record['tokens'])))
        return posts

    def write_vocab(self, vocab: Vocabulary) -> str:
        with self._open_for_write(VOCAB) as handle:
            handle.write(self._header(VOCAB))
            for word in vocab.entries:
                handle.write(word + '\n')
        return self.path(VOCAB)

    def read_vocab(self) -> Vocabulary:
        self.require(VOCAB)
        with open(self.path(VOCAB), encoding='utf-8') as handle:
            self._check_header(VOCAB, handle.readline())
            return Vocabulary(line.rstrip('\n') for line in handle if line.rstrip('\n'))

    # Influence weights

    def write_weights(self, weights: List[InfluenceWeight]) -> str:
        frame = pd.DataFrame([{
            'post_id': w.post_id,
            'itf': w.itf,
            'iidf': w.iidf,
            'Y': w.attention,
            'mean_gap_hours': w.mean_gap,
            'adjusted': w.adjusted,
            'w': w.weight,
            'pacing_imputed': int(w.pacing_imputed),
        } for w in weights], columns=WEIGHT_COLUMNS)
        return self.write_table(WEIGHTS, frame)

    def read_weights(self) -> List[InfluenceWeight]:
        frame = self.read_table(WEIGHTS, dtype={'post_id': str})
        missing = [c for c in WEIGHT_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"Artifact {WEIGHTS} is missing column(s) {', '.join(missing)}")
        return [InfluenceWeight(post_id=row.post_id, itf=float(row.itf), iidf=float(row.iidf),
                                attention=float(row.Y), mean_gap=float(row.mean_gap_hours),
                                adjusted=float(row.adjusted), weight=float(row.w),
                                pacing_imputed=bool(int(row.pacing_imputed)))
                for row in frame.itertuples(index=False)]

    # Graph

    def write_graph(self, graph: CooccurrenceGraph) -> List[str]:
        frame = pd.DataFrame({
            'i': graph.rows,
            'j': graph.cols,
            'word_i': [graph.vocab[i] for i in graph.rows],
            'word_j': [graph.vocab[j] for j in graph.cols],
            'weight': graph.weights,
        }, columns=EDGE_COLUMNS)
        return [self.write_table(EDGES, frame), self.write_json(GRAPH_SUMMARY, graph.summary())]

    def read_graph(self, vocab: Optional[Vocabulary] = None) -> CooccurrenceGraph:
        vocab = vocab or self.read_vocab()
        frame = self.read_table(EDGES, dtype={'word_i': str, 'word_j': str})
        missing = [c for c in EDGE_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"Artifact {EDGES} is missing column(s) {', '.join(missing)}")
        graph = CooccurrenceGraph(vocab, frame['i'].to_numpy(dtype=np.int64), frame['j'].to_numpy(dtype=np.int64),
                                  frame['weight'].to_numpy(dtype=np.float64))
        summary = self.read_json(GRAPH_SUMMARY) if self.exists(GRAPH_SUMMARY) else None
        if summary and summary.get('V') != graph.V:
            raise DataError(f"Graph was built over V={summary.get('V')} words but the vocabulary has {graph.V}")
        return graph

    # Model

    def write_model(self, model: FactorModel, trace: FitTrace, solver_config: Dict[str, Any]) -> List[str]:
        payload = {
            'model': model.to_dict(),
            'config': solver_config,
            'objective': trace.final_objective,
            'iterations': trace.iterations,
            'converged': trace.converged,
            'seed': trace.seed,
        }
        trace_frame = pd.DataFrame(trace.records, columns=['iteration', 'objective', 'kl', 'l1_h', 'rdec',
                                                           'admm_residual'])
        return [self.write_json(MODEL, payload), self.write_table(TRACE, trace_frame, sep=',')]

    def read_model(self) -> FactorModel:
        return FactorModel.from_dict(self.read_json(MODEL)['model'])
