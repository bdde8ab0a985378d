"""
Command-line entry point
Runs pipeline stages: ingest, weights, graph, fit, sweep, report, ablate, all
"""
import argparse
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from services.errors import TopicMinerError
from services.logger import configure_logging
from services.pipeline_config import PRESETS, load_config
from services.workflow import SUBCOMMANDS, WorkflowOrchestrator

# Flags whose dest is not a config key
CLI_ONLY = {'command', 'config', 'log_dir', 'log_level'}


def _int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {value!r}")


def _option_parser() -> argparse.ArgumentParser:
    """Options shared by every subcommand; dests match the config-file keys"""
    parser = argparse.ArgumentParser(add_help=False)

    general = parser.add_argument_group('general')
    general.add_argument('--config', help='KEY=value config file (flags override it)')
    general.add_argument('--out-dir', dest='OUT_DIR', help='artifact directory (default: out)')
    general.add_argument('--seed', dest='SEED', type=int)
    general.add_argument('--preset', dest='PRESET', choices=PRESETS)
    general.add_argument('--log-dir', dest='log_dir', help='directory for daily log files (env LOG_DIR)')
    general.add_argument('--log-level', dest='log_level', help='DEBUG, INFO, WARNING, ERROR (env LOG_LEVEL)')

    corpus = parser.add_argument_group('corpus')
    corpus.add_argument('--input', dest='INPUT', help='JSONL or CSV post file')
    corpus.add_argument('--format', dest='FORMAT', choices=('jsonl', 'csv'))
    corpus.add_argument('--tokenizer', dest='TOKENIZER', choices=('whitespace', 'jieba'))
    corpus.add_argument('--stop-words', dest='STOP_WORDS')
    corpus.add_argument('--protected-terms', dest='PROTECTED_TERMS')
    corpus.add_argument('--replacements', dest='REPLACEMENTS')

    influence = parser.add_argument_group('influence')
    influence.add_argument('--eps-f', dest='EPS_F', type=float)
    influence.add_argument('--tau0', dest='TAU0', type=float, help='time unit in hours')
    influence.add_argument('--decay-g', dest='DECAY_G', type=float)
    influence.add_argument('--hn-shift', dest='HN_SHIFT', type=float)

    graph = parser.add_argument_group('graph')
    graph.add_argument('--salience', dest='SALIENCE', choices=('unit', 'capped_idf'))
    graph.add_argument('--salience-cap', dest='SALIENCE_CAP', type=float)
    graph.add_argument('--boost', dest='BOOST', help='domain boost word list')
    graph.add_argument('--boost-factor', dest='BOOST_FACTOR', type=float)
    graph.add_argument('--no-weights', dest='USE_WEIGHTS', action='store_const', const=False)
    graph.add_argument('--no-fallback-uniform', dest='FALLBACK_UNIFORM', action='store_const', const=False)
    graph.add_argument('--plain-graph', dest='PRESET', action='store_const', const='plain-graph')

    solver = parser.add_argument_group('fit')
    solver.add_argument('--k', dest='K', type=int)
    solver.add_argument('--lambda-h', dest='LAMBDA_H', type=float)
    solver.add_argument('--gamma', dest='GAMMA', type=float)
    solver.add_argument('--no-gamma', dest='GAMMA', action='store_const', const=0.0)
    solver.add_argument('--rho', dest='RHO', type=float)
    solver.add_argument('--eps', dest='EPS', type=float)
    solver.add_argument('--tol', dest='TOL', type=float)
    solver.add_argument('--max-outer', dest='MAX_OUTER', type=int)
    solver.add_argument('--max-admm', dest='MAX_ADMM', type=int)
    solver.add_argument('--max-inner', dest='MAX_INNER', type=int)
    solver.add_argument('--decorrelation-step', dest='DECORRELATION_STEP', type=float)
    solver.add_argument('--restarts', dest='RESTARTS', type=int)
    solver.add_argument('--no-h', dest='NO_H', action='store_const', const=True)
    solver.add_argument('--cold-admm', dest='COLD_ADMM', action='store_const', const=True)

    metrics = parser.add_argument_group('sweep / metrics')
    metrics.add_argument('--k-list', dest='K_LIST', type=_int_list, help='e.g. 10,15,20,25,30')
    metrics.add_argument('--m', dest='M', type=int, help='top words per topic for metrics')
    metrics.add_argument('--reference', dest='REFERENCE', choices=('posts', 'graph'))
    metrics.add_argument('--missing-words', dest='MISSING_WORDS', choices=('penalize', 'skip', 'epsilon'),
                         help='NPMI of pairs with a word absent from the reference')
    metrics.add_argument('--td-floor', dest='TD_FLOOR', type=float)
    metrics.add_argument('--window', dest='WINDOW', type=int, help='Cv sliding window')
    metrics.add_argument('--sharpness-on', dest='SHARPNESS_ON', choices=('U', 'residual'))

    report = parser.add_argument_group('report')
    report.add_argument('--n-top-posts', dest='N_TOP_POSTS', type=int)
    report.add_argument('--n-keywords', dest='N_KEYWORDS', type=int)
    report.add_argument('--weighted-activity', dest='WEIGHTED_ACTIVITY', action='store_const', const=True)
    report.add_argument('--display-m', dest='DISPLAY_M', type=int)
    report.add_argument('--place-names', dest='PLACE_NAMES')
    return parser


def build_parser() -> argparse.ArgumentParser:
    options = _option_parser()
    parser = argparse.ArgumentParser(
        prog='topic-miner',
        description='Influence-weighted keyword graph topic mining for short social-media posts'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    descriptions = {
        'ingest': 'load, deduplicate and tokenize posts',
        'weights': 'compute per-post influence weights',
        'graph': 'build the keyword co-occurrence graph',
        'fit': 'factorize the graph at a fixed K',
        'sweep': 'fit and score a list of K values, select K',
        'report': 'score topics, assign posts, extract event keywords',
        'ablate': 'compare the ablation presets at a fixed K',
        'all': 'ingest -> weights -> graph -> sweep (with --k-list) or fit -> report',
    }
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[options], help=descriptions[name])
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: value for key, value in vars(args).items() if key not in CLI_ONLY and value is not None}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    log_dir = args.log_dir or os.getenv('LOG_DIR')
    log_level = args.log_level or os.getenv('LOG_LEVEL', 'INFO')
    configure_logging(log_dir=log_dir, log_level=log_level)

    try:
        config = load_config(args.config, collect_overrides(args))
        orchestrator = WorkflowOrchestrator(config)
        orchestrator.execute(args.command)
    except TopicMinerError as e:
        print(f"✗ Error: {str(e)}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
