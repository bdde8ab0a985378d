"""
Topic Evaluation
Scores topic sets with NPMI, Cv, topic diversity and sharpness, and runs the K sweep
"""
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from scipy.stats import entropy as shannon_entropy

from .errors import ConfigError, DataError, TopicMinerError
from .graph_builder import CooccurrenceGraph
from .logger import get_logger
from .pdf_solver import FactorModel, FitTrace, PDFSolver, SolverConfig
from .text_cleaner import TokenizedPost, Vocabulary


SMOOTHING = 1e-12
REFERENCE_MODES = ('posts', 'graph')
# How a word pair scores when either word is absent from the reference
MISSING_WORD_POLICIES = ('penalize', 'skip', 'epsilon')
SHARPNESS_SOURCES = ('U', 'residual')
SELECTION_TIE = 1e-12


@dataclass
class MetricOptions:
    m: int = 10
    reference: str = 'posts'
    missing_words: str = 'penalize'
    window: int = 110
    td_floor: float = 0.5
    sharpness_on: str = 'U'
    sharpness_m: Tuple[int, ...] = (10, 25)

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError(f"Top-word count m must be >= 2, got {self.m}")
        if self.reference not in REFERENCE_MODES:
            raise ConfigError(f"Unknown NPMI reference '{self.reference}' (expected posts or graph)")
        if self.missing_words not in MISSING_WORD_POLICIES:
            raise ConfigError(f"Unknown missing-word policy '{self.missing_words}' "
                              f"(expected {', '.join(MISSING_WORD_POLICIES)})")
        if self.window < 2:
            raise ConfigError(f"Cv window must be >= 2, got {self.window}")
        if not 0 <= self.td_floor <= 1:
            raise ConfigError(f"TD floor must lie in [0, 1], got {self.td_floor}")
        if self.sharpness_on not in SHARPNESS_SOURCES:
            raise ConfigError(f"Unknown sharpness source '{self.sharpness_on}' (expected U or residual)")
        self.sharpness_m = tuple(int(m) for m in self.sharpness_m)
        if not self.sharpness_m or min(self.sharpness_m) < 1:
            raise ConfigError("Sharpness top-m list must hold positive integers")


@dataclass
class TopicWordSet:
    topic_id: int
    top_words: List[str]

    def __post_init__(self):
        if len(self.top_words) < 2:
            raise ConfigError(f"Topic {self.topic_id}: needs at least 2 top words")
        if len(set(self.top_words)) != len(self.top_words):
            raise DataError(f"Topic {self.topic_id}: top words are not unique")

    @property
    def m(self) -> int:
        return len(self.top_words)


@dataclass
class MetricReport:
    npmi: float
    cv: float
    td: float
    per_topic_entropy: List[float] = field(default_factory=list)
    topk_mass: Dict[int, float] = field(default_factory=dict)
    per_topic_npmi: List[float] = field(default_factory=list)
    per_topic_cv: List[float] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def mean_entropy(self) -> float:
        return float(np.mean(self.per_topic_entropy)) if self.per_topic_entropy else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'npmi': self.npmi,
            'cv': self.cv,
            'td': self.td,
            'mean_entropy': self.mean_entropy,
            'per_topic_entropy': self.per_topic_entropy,
            'topk_mass': {str(m): v for m, v in self.topk_mass.items()},
            'per_topic_npmi': self.per_topic_npmi,
            'per_topic_cv': self.per_topic_cv,
            'metadata': self.metadata,
        }


def top_words(model: FactorModel, vocab: Vocabulary, m: int, source: str = 'U') -> List[TopicWordSet]:
    """Top-m words of every topic column by descending loading, ties to the smaller word index"""
    matrix = model.U if source == 'U' else model.H
    if m > len(vocab):
        raise ConfigError(f"m={m} exceeds the vocabulary size V={len(vocab)}")
    topics = []
    for k in range(model.K):
        order = np.argsort(-matrix[:, k], kind='stable')[:m]
        topics.append(TopicWordSet(topic_id=k, top_words=[vocab[i] for i in order]))
    return topics


def npmi_value(p_pair: float, p_first: float, p_second: float, eps: float = SMOOTHING) -> float:
    """ln((p_ij + eps) / (p_i p_j)) / -ln(p_ij + eps), clipped to [-1, 1]"""
    joint = p_pair + eps
    if joint >= 1.0:
        return 1.0
    value = math.log(joint / (p_first * p_second)) / -math.log(joint)
    return min(1.0, max(-1.0, value))


class CooccurrenceReference:
    def __init__(self, mode: str, marginals: Dict[str, float], joint_fn, size: float):
        """
        Word and pair probabilities an NPMI score is measured against

        Args:
            mode: 'posts' or 'graph'
            marginals: word -> p(word)
            joint_fn: callable (word_a, word_b) -> p(a, b)
            size: Number of reference documents (posts) or total edge weight (graph)
        """
        self.mode = mode
        self.marginals = marginals
        self._joint = joint_fn
        self.size = size

    def p_word(self, word: str) -> Optional[float]:
        return self.marginals.get(word)

    def p_pair(self, first: str, second: str) -> float:
        return self._joint(first, second)

    @classmethod
    def from_posts(cls, posts: List[TokenizedPost]) -> 'CooccurrenceReference':
        """Post-level boolean co-occurrence"""
        postings: Dict[str, Set[int]] = {}
        for doc_id, post in enumerate(posts):
            for word in set(post.tokens):
                postings.setdefault(word, set()).add(doc_id)
        n_docs = float(len(posts))
        if n_docs == 0:
            raise DataError("NPMI reference corpus is empty")
        marginals = {w: len(ids) / n_docs for w, ids in postings.items()}

        def joint(first: str, second: str) -> float:
            return len(postings.get(first, set()) & postings.get(second, set())) / n_docs

        return cls('posts', marginals, joint, n_docs)

    @classmethod
    def from_graph(cls, graph: CooccurrenceGraph) -> 'CooccurrenceReference':
        """p(i, j) = W_ij / sum W and p(i) = strength_i / (2 sum W) over the upper triangle"""
        total = graph.total_weight
        if total <= 0:
            raise DataError("NPMI reference graph has no edges")
        strength = graph.strength()
        marginals = {graph.vocab[i]: float(strength[i]) / (2.0 * total)
                     for i in range(graph.V) if strength[i] > 0}
        edges = graph.edge_dict()

        def joint(first: str, second: str) -> float:
            a, b = graph.vocab.get(first), graph.vocab.get(second)
            if a is None or b is None:
                return 0.0
            return edges.get((min(a, b), max(a, b)), 0.0) / total

        return cls('graph', marginals, joint, total)


def _canonical_pairs(words: Sequence[str]) -> List[Tuple[str, str]]:
    return list(combinations(sorted(words), 2))


def npmi_scores(topics: List[TopicWordSet], reference: CooccurrenceReference, eps: float = SMOOTHING,
                missing_words: str = 'penalize') -> Tuple[List[float], List[str]]:
    """
    Per-topic mean pairwise NPMI

    Args:
        topics: Topic word sets
        reference: Co-occurrence statistics
        eps: Additive smoothing on the joint probability
        missing_words: Pairs with a word absent from the reference score -1 ('penalize'),
            are left out of the mean ('skip'), or use p = eps for the absent word ('epsilon')

    Returns:
        Tuple of (one score per topic, words absent from the reference)
    """
    missing: List[str] = []
    scores = []
    for topic in topics:
        values = []
        for first, second in _canonical_pairs(topic.top_words):
            p_first, p_second = reference.p_word(first), reference.p_word(second)
            for word, p in ((first, p_first), (second, p_second)):
                if p is None and word not in missing:
                    missing.append(word)
            if (p_first is None or p_second is None) and missing_words != 'epsilon':
                if missing_words == 'penalize':
                    values.append(-1.0)
                continue
            values.append(npmi_value(reference.p_pair(first, second),
                                     p_first if p_first is not None else eps,
                                     p_second if p_second is not None else eps, eps))
        scores.append(float(np.mean(values)) if values else -1.0)
    if missing:
        get_logger().warning("Top words absent from the NPMI reference", words=len(missing),
                             sample=','.join(missing[:5]))
    return scores, missing


def npmi(topics: List[TopicWordSet], reference: CooccurrenceReference, missing_words: str = 'penalize') -> float:
    """Mean over topics of the mean pairwise NPMI of their top words"""
    if not topics:
        raise DataError("NPMI needs at least one topic")
    scores, _ = npmi_scores(topics, reference, missing_words=missing_words)
    return float(np.mean(scores))


def _iter_windows(tokens: List[str], relevant: Set[str], window: int) -> Iterator[Set[str]]:
    """Boolean sliding windows restricted to relevant words; short posts form one window"""
    if len(tokens) <= window:
        yield {t for t in tokens if t in relevant}
        return
    counts = Counter(t for t in tokens[:window] if t in relevant)
    yield set(counts)
    for start in range(1, len(tokens) - window + 1):
        leaving, entering = tokens[start - 1], tokens[start + window - 1]
        if leaving in relevant:
            counts[leaving] -= 1
            if counts[leaving] == 0:
                del counts[leaving]
        if entering in relevant:
            counts[entering] += 1
        yield set(counts)


def cv_scores(topics: List[TopicWordSet], posts: List[TokenizedPost],
              window: int = 110) -> Tuple[List[float], Dict[str, Any]]:
    """
    Per-topic Cv: one-set segmentation, NPMI context vectors over the topic's words and
    cosine similarity of each word vector with the topic's summed vector

    Returns:
        Tuple of (one score per topic, metadata recording the effective window)
    """
    if window < 2:
        raise ConfigError(f"Cv window must be >= 2, got {window}")
    longest = max((p.length for p in posts), default=0)
    effective = window
    if longest < window:
        effective = max(longest, 2)
        get_logger().warning("Cv window longer than every post; using the longest post",
                             window=window, effective_window=effective)

    relevant = {w for topic in topics for w in topic.top_words}
    n_windows = 0
    single: Counter = Counter()
    joint: Counter = Counter()
    for post in posts:
        for present in _iter_windows(post.tokens, relevant, effective):
            n_windows += 1
            single.update(present)
            joint.update(_canonical_pairs(present))
    if n_windows == 0:
        raise DataError("Cv reference corpus has no windows")

    scores = []
    for topic in topics:
        words = topic.top_words
        vectors = np.zeros((len(words), len(words)))
        for a, first in enumerate(words):
            if single[first] == 0:
                continue
            for b, second in enumerate(words):
                if single[second] == 0:
                    continue
                if a == b:
                    co_count = single[first]
                else:
                    co_count = joint[tuple(sorted((first, second)))]
                vectors[a, b] = npmi_value(co_count / n_windows, single[first] / n_windows,
                                           single[second] / n_windows)
        topic_vector = vectors.sum(axis=0)
        topic_norm = np.linalg.norm(topic_vector)
        similarities = []
        for vector in vectors:
            norm = np.linalg.norm(vector)
            similarities.append(0.0 if norm == 0 or topic_norm == 0
                                else float(vector @ topic_vector) / (norm * topic_norm))
        scores.append(float(np.mean(similarities)))

    metadata = {'segmentation': 'one_set', 'measure': 'npmi', 'window': window,
                'effective_window': effective, 'windows': n_windows}
    return scores, metadata


def cv(topics: List[TopicWordSet], posts: List[TokenizedPost], window: int = 110) -> float:
    """Mean Cv over topics, floored at 0"""
    scores, _ = cv_scores(topics, posts, window)
    return max(0.0, float(np.mean(scores)))


def topic_diversity(topics: List[TopicWordSet]) -> float:
    """|unique top words| / (K m)"""
    if not topics:
        raise DataError("Topic diversity needs at least one topic")
    m = topics[0].m
    if any(t.m != m for t in topics):
        raise ConfigError("All topics must have the same number of top words")
    unique = {w for t in topics for w in t.top_words}
    return len(unique) / (len(topics) * m)


def sharpness(model: FactorModel, m_list: Iterable[int] = (10, 25),
              source: str = 'U') -> Tuple[List[float], Dict[int, List[float]]]:
    """
    Entropy (nats) and cumulative top-m mass of every topic multinomial

    Args:
        model: Fitted model
        m_list: Cut-offs for the top-m mass
        source: 'U' for the topic dictionary columns, 'residual' for columns of H

    Returns:
        Tuple of (per-topic entropies, m -> per-topic top-m masses)
    """
    if source not in SHARPNESS_SOURCES:
        raise ConfigError(f"Unknown sharpness source '{source}'")
    matrix = model.U if source == 'U' else model.H
    m_list = sorted(set(int(m) for m in m_list))
    entropies: List[float] = []
    masses: Dict[int, List[float]] = {m: [] for m in m_list}
    skipped = 0
    for k in range(matrix.shape[1]):
        column = np.maximum(matrix[:, k], 0.0)
        total = column.sum()
        if total <= 0:
            skipped += 1
            continue
        distribution = column / total
        entropies.append(float(shannon_entropy(distribution)))
        cumulative = np.cumsum(np.sort(distribution)[::-1])
        for m in m_list:
            masses[m].append(float(min(1.0, cumulative[min(m, len(cumulative)) - 1])))
    if skipped:
        get_logger().warning("Topics with zero mass skipped in sharpness", source=source, topics=skipped)
    return entropies, masses


class TopicMetrics:
    def __init__(self, options: MetricOptions = None):
        """
        Initialize topic metrics

        Args:
            options: Top-m, NPMI reference mode, Cv window, TD floor and sharpness settings
        """
        self.options = options or MetricOptions()

    def reference(self, posts: List[TokenizedPost], graph: Optional[CooccurrenceGraph]) -> CooccurrenceReference:
        if self.options.reference == 'graph':
            if graph is None:
                raise ConfigError("Graph NPMI reference requested without a graph")
            return CooccurrenceReference.from_graph(graph)
        return CooccurrenceReference.from_posts(posts)

    def evaluate(self, model: FactorModel, vocab: Vocabulary, posts: List[TokenizedPost],
                 graph: Optional[CooccurrenceGraph] = None) -> MetricReport:
        options = self.options
        topics = top_words(model, vocab, min(options.m, len(vocab)))
        per_topic_npmi, missing = npmi_scores(topics, self.reference(posts, graph),
                                              missing_words=options.missing_words)
        per_topic_cv, cv_meta = cv_scores(topics, posts, options.window)
        entropies, masses = sharpness(model, options.sharpness_m, options.sharpness_on)

        return MetricReport(
            npmi=float(np.mean(per_topic_npmi)),
            cv=max(0.0, float(np.mean(per_topic_cv))),
            td=topic_diversity(topics),
            per_topic_entropy=entropies,
            topk_mass={m: float(np.mean(v)) if v else 0.0 for m, v in masses.items()},
            per_topic_npmi=per_topic_npmi,
            per_topic_cv=per_topic_cv,
            metadata={'m': topics[0].m, 'reference': options.reference, 'missing_words': missing,
                      'missing_word_policy': options.missing_words,
                      'sharpness_on': options.sharpness_on, 'cv': cv_meta},
        )


@dataclass
class SweepResult:
    rows: List[Dict[str, float]]
    selected_k: int
    td_floor_met: bool
    models: Dict[int, FactorModel] = field(default_factory=dict)
    traces: Dict[int, FitTrace] = field(default_factory=dict)
    reports: Dict[int, MetricReport] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)


def select_k(rows: List[Dict[str, float]], td_floor: float) -> Tuple[int, bool]:
    """argmax NPMI among rows with TD >= td_floor, ties to the smaller K"""
    eligible = [r for r in rows if r['td'] >= td_floor]
    floor_met = bool(eligible)
    if not eligible:
        get_logger().warning("No K meets the TD floor; selecting by NPMI alone", td_floor=td_floor)
        eligible = rows
    best = None
    for row in sorted(eligible, key=lambda r: r['K']):
        if best is None or row['npmi'] > best['npmi'] + SELECTION_TIE:
            best = row
    return int(best['K']), floor_met


def sweep_k(graph: CooccurrenceGraph, posts: List[TokenizedPost], k_values: Iterable[int],
            cfg: SolverConfig, options: MetricOptions = None) -> SweepResult:
    """
    Fit and score one model per K

    Args:
        graph: Co-occurrence graph
        posts: Tokenized corpus (NPMI posts reference and Cv windows)
        k_values: Candidate topic counts
        cfg: Solver configuration; K is overridden, the seed policy is shared
        options: Metric options

    Returns:
        SweepResult with the comparison table and the selected K
    """
    options = options or MetricOptions()
    k_values = sorted(set(int(k) for k in k_values))
    if not k_values:
        raise ConfigError("K sweep needs at least one K")
    for k in k_values:
        if k < 1 or k > graph.V:
            raise ConfigError(f"K={k} is outside [1, V={graph.V}]")

    metrics = TopicMetrics(options)
    logger = get_logger()
    result = SweepResult(rows=[], selected_k=k_values[0], td_floor_met=True)
    for k in k_values:
        try:
            model, trace = PDFSolver(replace(cfg, K=k)).fit(graph)
            report = metrics.evaluate(model, graph.vocab, posts, graph)
        except TopicMinerError as e:
            e.args = (f"K={k}: {e.args[0] if e.args else e}",) + tuple(e.args[1:])
            raise
        row = {'K': k, 'npmi': report.npmi, 'cv': report.cv, 'td': report.td,
               'mean_entropy': report.mean_entropy}
        for m, mass in sorted(report.topk_mass.items()):
            row[f"top{m}_mass"] = mass
        row['objective'] = trace.final_objective
        result.rows.append(row)
        result.models[k], result.traces[k], result.reports[k] = model, trace, report
        logger.info("Sweep point scored", K=k, npmi=f"{report.npmi:.4f}", cv=f"{report.cv:.4f}",
                    td=f"{report.td:.4f}")

    result.selected_k, result.td_floor_met = select_k(result.rows, options.td_floor)
    logger.info("K selected", selected_k=result.selected_k, td_floor=options.td_floor,
                td_floor_met=result.td_floor_met)
    return result
