"""
Workflow Orchestrator
Coordinates the pipeline stages and hands data between them through on-disk artifacts
"""
from dataclasses import replace
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from . import artifact_store as store_names
from .artifact_store import ArtifactStore
from .errors import ConfigError, DataError
from .graph_builder import CooccurrenceGraph, GraphBuilder
from .influence_service import InfluenceService
from .logger import get_logger
from .pdf_solver import PDFSolver
from .pipeline_config import PRESETS, PipelineConfig, apply_preset
from .post_loader import corpus_stats, load_posts
from .text_cleaner import TextCleaner, get_tokenizer, load_replacements, load_word_list
from .topic_metrics import TopicMetrics, sweep_k
from .topic_miner import TopicMiner, cluster_sizes


SUBCOMMANDS = ('ingest', 'weights', 'graph', 'fit', 'sweep', 'report', 'ablate', 'all')

# Artifacts each stage reads, checked before the stage computes anything
STAGE_INPUTS = {
    'ingest': [],
    'weights': [store_names.POSTS],
    'graph': [store_names.TOKENS, store_names.VOCAB, store_names.WEIGHTS],
    'fit': [store_names.VOCAB, store_names.EDGES],
    'sweep': [store_names.TOKENS, store_names.VOCAB, store_names.EDGES],
    'report': [store_names.MODEL, store_names.TOKENS, store_names.VOCAB],
    'ablate': [store_names.TOKENS, store_names.VOCAB, store_names.WEIGHTS],
}


class WorkflowOrchestrator:
    def __init__(self, config: PipelineConfig):
        """
        Initialize orchestrator and the services every stage uses

        Args:
            config: Merged pipeline configuration
        """
        self.config = config
        self.store = ArtifactStore(config.out_dir)
        self.text_cleaner = TextCleaner(
            stop_words=load_word_list(config.stop_words_path),
            protected_terms=load_word_list(config.protected_terms_path),
            replacements=load_replacements(config.replacements_path),
            tokenizer=get_tokenizer(config.tokenizer)
        )
        self.influence_service = InfluenceService(config.influence)
        self.graph_builder = GraphBuilder(config.graph)
        self.solver = PDFSolver(config.solver)
        self.metrics = TopicMetrics(config.metrics)
        self.miner = TopicMiner(
            options=config.mining,
            stop_words=self.text_cleaner.stop_words,
            place_names=load_word_list(config.place_names_path)
        )

        self.logger = get_logger()

    def validate(self, subcommand: str):
        """Check the inputs of a subcommand before any computation"""
        if subcommand not in SUBCOMMANDS:
            raise ConfigError(f"Unknown subcommand '{subcommand}' (expected one of {', '.join(SUBCOMMANDS)})")
        if subcommand in ('ingest', 'all') and not self.config.input_path:
            raise ConfigError(f"`{subcommand}` needs an input file (--input or INPUT=)")
        if subcommand == 'ablate':
            self._validate_ablation_base()
        for name in STAGE_INPUTS.get(subcommand, []):
            self.store.require(name)
        if subcommand == 'report' and self.config.metrics.reference == 'graph':
            self.store.require(store_names.EDGES)

    def _validate_ablation_base(self):
        """The `full` row must run the unablated model"""
        config = self.config
        if config.preset != 'full':
            raise ConfigError("`ablate` applies every preset itself; run it with the full preset")
        switched_off = []
        if not config.graph.use_weights:
            switched_off.append('USE_WEIGHTS=false')
        if config.solver.gamma == 0:
            switched_off.append('GAMMA=0')
        if config.solver.freeze_h:
            switched_off.append('NO_H')
        if switched_off:
            raise ConfigError(f"`ablate` needs the full model as its base; drop {', '.join(switched_off)}")

    def execute(self, subcommand: str) -> Dict[str, Any]:
        """
        Run one subcommand and write the run manifest

        Args:
            subcommand: ingest, weights, graph, fit, sweep, report, ablate or all

        Returns:
            Dictionary with status, stages run, artifacts written and per-stage results
        """
        self.validate(subcommand)

        print(f"\n{'='*60}")
        print(f"Starting `{subcommand}` (seed={self.config.seed}, preset={self.config.preset})")
        print(f"{'='*60}\n")
        self.logger.log_pipeline_start(subcommand, self.config.seed)

        stages = ['ingest', 'weights', 'graph', 'sweep' if self.config.k_list else 'fit', 'report'] \
            if subcommand == 'all' else [subcommand]
        runners: Dict[str, Callable[[], Dict[str, Any]]] = {
            'ingest': self.run_ingest,
            'weights': self.run_weights,
            'graph': self.run_graph,
            'fit': self.run_fit,
            'sweep': self.run_sweep,
            'report': self.run_report,
            'ablate': self.run_ablate,
        }

        result: Dict[str, Any] = {'status': 'success', 'subcommand': subcommand, 'stages': [],
                                  'artifacts': [], 'results': {}}
        try:
            for stage in stages:
                self.logger.log_step(stage, 'started')
                stage_result = runners[stage]()
                result['stages'].append(stage)
                result['artifacts'].extend(stage_result.pop('artifacts', []))
                result['results'][stage] = stage_result
                self.logger.log_step(stage, 'completed', **stage_result)

            result['artifacts'].append(self.write_manifest(subcommand, result['stages']))

            print(f"\n{'='*60}")
            print(f"`{subcommand}` completed!")
            print(f"Stages: {', '.join(result['stages'])}")
            print(f"Artifacts written: {len(result['artifacts'])} (in {self.config.out_dir})")
            print(f"{'='*60}\n")
            self.logger.log_pipeline_complete(subcommand, result)
            return result

        except Exception as e:
            self.logger.log_pipeline_error(subcommand, e)
            print(f"\n✗ `{subcommand}` failed: {str(e)}")
            raise

    def write_manifest(self, subcommand: str, stages: List[str]) -> str:
        return self.store.write_json(store_names.RUN_MANIFEST, {
            'subcommand': subcommand,
            'stages': stages,
            'seed': self.config.seed,
            'config': self.config.to_dict(),
            'metadata': {'created_at': datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')},
        })

    def run_ingest(self) -> Dict[str, Any]:
        print("[ingest] Loading and cleaning posts...")
        posts, duplicates = load_posts(self.config.input_path, self.config.input_format)
        tokenized, vocab = self.text_cleaner.preprocess(posts)

        stats = corpus_stats(posts, duplicates)
        stats['vocabulary'] = len(vocab)
        stats['no_bigram_posts'] = sum(1 for p in tokenized if p.no_bigram)

        artifacts = [
            self.store.write_posts(posts),
            self.store.write_tokens(tokenized),
            self.store.write_vocab(vocab),
            self.store.write_json(store_names.CORPUS_STATS, stats),
        ]
        print(f"✓ Posts: {len(posts)} ({duplicates} duplicate(s) removed)")
        print(f"✓ Vocabulary: {len(vocab)} words")
        if stats['no_bigram_posts']:
            print(f"⊘ {stats['no_bigram_posts']} post(s) with fewer than 2 tokens contribute no edges")
        return {'artifacts': artifacts, 'posts': len(posts), 'duplicates': duplicates, 'vocabulary': len(vocab)}

    def run_weights(self) -> Dict[str, Any]:
        print("\n[weights] Computing influence weights...")
        weights = self.influence_service.weigh(self.store.read_posts())
        summary = self.influence_service.summarize(weights)
        artifact = self.store.write_weights(weights)
        print(f"✓ Weighted {summary['posts']} posts ({summary['nonzero']} nonzero, "
              f"{summary['imputed_pacing']} with imputed pacing)")
        return {'artifacts': [artifact], **summary}

    def _build_graph(self, builder: GraphBuilder) -> CooccurrenceGraph:
        return builder.build(self.store.read_tokens(), self.store.read_vocab(), self.store.read_weights())

    def run_graph(self) -> Dict[str, Any]:
        print("\n[graph] Building keyword co-occurrence graph...")
        graph = self._build_graph(self.graph_builder)
        artifacts = self.store.write_graph(graph)
        print(f"✓ Graph: V={graph.V}, edges={graph.nnz}, total weight={graph.total_weight:.4f}")
        return {'artifacts': artifacts, **graph.summary()}

    def run_fit(self) -> Dict[str, Any]:
        print(f"\n[fit] Factorizing with K={self.config.solver.K}...")
        graph = self.store.read_graph()
        model, trace = self.solver.fit(graph)
        artifacts = self.store.write_model(model, trace, self.config.solver.to_dict())
        print(f"✓ Objective {trace.final_objective:.6f} after {trace.iterations} iteration(s)"
              f"{'' if trace.converged else ' (max_outer reached)'}")
        if model.h_collapsed:
            print("⊘ Residual H collapsed to zero")
        return {'artifacts': artifacts, 'K': model.K, 'iterations': trace.iterations,
                'objective': trace.final_objective}

    def run_sweep(self) -> Dict[str, Any]:
        k_values = self.config.sweep_k_values()
        print(f"\n[sweep] Sweeping K over {k_values}...")
        graph = self.store.read_graph()
        result = sweep_k(graph, self.store.read_tokens(), k_values, self.config.solver, self.config.metrics)

        selected = result.selected_k
        artifacts = [
            self.store.write_table(store_names.SWEEP_TABLE, result.to_frame(), sep=','),
            self.store.write_json(store_names.SWEEP_SELECTION, {
                'selected_k': selected,
                'k_values': k_values,
                'td_floor': self.config.metrics.td_floor,
                'td_floor_met': result.td_floor_met,
                'selection': 'argmax NPMI with TD >= td_floor, ties to the smaller K',
            }),
        ]
        artifacts += self.store.write_model(result.models[selected], result.traces[selected],
                                            replace(self.config.solver, K=selected).to_dict())
        for row in result.rows:
            marker = '✓' if row['K'] == selected else ' '
            print(f"{marker} K={row['K']:<4} NPMI={row['npmi']:.4f}  Cv={row['cv']:.4f}  TD={row['td']:.4f}")
        return {'artifacts': artifacts, 'selected_k': selected}

    def run_report(self) -> Dict[str, Any]:
        print("\n[report] Scoring and mining topics...")
        model = self.store.read_model()
        vocab = self.store.read_vocab()
        tokens = self.store.read_tokens()
        if model.V != len(vocab):
            raise DataError(f"Model was fitted on V={model.V} words but the vocabulary has {len(vocab)}; "
                              f"rerun `fit`")
        graph = self.store.read_graph(vocab) if self.store.exists(store_names.EDGES) else None

        report = self.metrics.evaluate(model, vocab, tokens, graph)
        topics, assignments = self.miner.mine(model, vocab, tokens)
        clusters = cluster_sizes(assignments, model.K)

        topics_frame = pd.DataFrame([{
            'rank': rank,
            'topic_id': t.topic_id,
            'a_k': t.importance,
            'n_assigned_posts': t.n_assigned_posts,
            'top_words': '|'.join(t.top_words),
        } for rank, t in enumerate(topics, 1)], columns=['rank', 'topic_id', 'a_k', 'n_assigned_posts', 'top_words'])
        events_frame = pd.DataFrame([{
            'topic_id': t.topic_id,
            'rank': rank,
            'keyword': word,
            'count': count,
        } for t in topics for rank, (word, count) in enumerate(t.event_keywords, 1)],
            columns=['topic_id', 'rank', 'keyword', 'count'])
        assignments_frame = pd.DataFrame([{
            'post_id': a.post_id,
            'dominant_topic': -1 if a.excluded else a.dominant,
            'max_activity': a.max_activity,
            'excluded': int(a.excluded),
        } for a in assignments], columns=['post_id', 'dominant_topic', 'max_activity', 'excluded'])

        artifacts = [
            self.store.write_table(store_names.TOPICS, topics_frame),
            self.store.write_table(store_names.EVENTS, events_frame),
            self.store.write_table(store_names.ASSIGNMENTS, assignments_frame),
            self.store.write_json(store_names.REPORT, {
                'K': model.K,
                'metrics': report.to_dict(),
                'excluded_posts': clusters['excluded'],
                'cluster_sizes': clusters['sizes'],
                'weighted_activity': self.config.mining.weighted_activity,
                'topics': [t.to_dict() for t in topics],
            }),
        ]

        print(f"✓ NPMI={report.npmi:.4f}  Cv={report.cv:.4f}  TD={report.td:.4f}  "
              f"entropy={report.mean_entropy:.4f}")
        for rank, t in enumerate(topics, 1):
            print(f"  #{rank} topic {t.topic_id} (a={t.importance:.4f}, posts={t.n_assigned_posts}): "
                  f"{', '.join(t.top_words)}")
        if clusters['excluded']:
            print(f"⊘ {clusters['excluded']} post(s) had no in-vocabulary token")
        return {'artifacts': artifacts, 'npmi': report.npmi, 'cv': report.cv, 'td': report.td,
                'excluded_posts': clusters['excluded']}

    def run_ablate(self, presets: Optional[List[str]] = None) -> Dict[str, Any]:
        """Fit every preset at the configured K and seed; NPMI is measured against the full graph"""
        presets = presets or list(PRESETS)
        print(f"\n[ablate] Comparing presets {', '.join(presets)} at K={self.config.solver.K}...")
        tokens = self.store.read_tokens()
        vocab = self.store.read_vocab()
        weights = self.store.read_weights()
        reference_graph = GraphBuilder(self.config.graph).build(tokens, vocab, weights)

        rows = []
        for preset in presets:
            variant = apply_preset(self.config, preset)
            graph = GraphBuilder(variant.graph).build(tokens, vocab, weights)
            model, _ = PDFSolver(variant.solver).fit(graph)
            report = TopicMetrics(variant.metrics).evaluate(model, vocab, tokens, reference_graph)
            rows.append({'preset': preset, 'npmi': report.npmi, 'cv': report.cv, 'td': report.td})
            print(f"✓ {preset:<12} NPMI={report.npmi:.4f}  Cv={report.cv:.4f}  TD={report.td:.4f}")

        artifact = self.store.write_table(store_names.ABLATION,
                                          pd.DataFrame(rows, columns=['preset', 'npmi', 'cv', 'td']), sep=',')
        return {'artifacts': [artifact], 'rows': rows}
