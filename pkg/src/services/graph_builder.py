"""
Keyword Graph Construction
Builds the influence-weighted co-occurrence graph over unordered adjacent bigrams
"""
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError
from .influence_service import InfluenceWeight
from .logger import get_logger
from .text_cleaner import TokenizedPost, Vocabulary


SALIENCE_MODES = ('unit', 'capped_idf')


@dataclass
class GraphOptions:
    salience: str = 'capped_idf'
    cap: float = 3.0
    boost_path: Optional[str] = None
    boost_factor: float = 2.0
    use_weights: bool = True
    fallback_uniform: bool = True

    def __post_init__(self):
        if self.salience not in SALIENCE_MODES:
            raise ConfigError(f"Unknown salience mode '{self.salience}' (expected one of {', '.join(SALIENCE_MODES)})")
        if not self.cap > 0:
            raise ConfigError(f"Salience cap must be > 0, got {self.cap}")
        if not self.boost_factor >= 0:
            raise ConfigError(f"Boost factor must be >= 0, got {self.boost_factor}")


class CooccurrenceGraph:
    def __init__(self, vocab: Vocabulary, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray):
        """
        Upper-triangle sparse storage of a symmetric, hollow, nonnegative matrix

        Args:
            vocab: Vocabulary indexing the nodes
            rows: Edge row indices (i < j), sorted together with cols
            cols: Edge column indices
            weights: Positive edge weights
        """
        self.vocab = vocab
        self.V = len(vocab)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)

        if not (len(self.rows) == len(self.cols) == len(self.weights)):
            raise DataError("Edge arrays must have equal length")
        if len(self.rows):
            if np.any(self.rows >= self.cols):
                raise DataError("Edges must satisfy i < j (no self-loops, upper triangle only)")
            if self.cols.max() >= self.V or self.rows.min() < 0:
                raise DataError("Edge index outside the vocabulary")
            if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
                raise DataError("Stored edge weights must be finite and > 0")
            order = np.lexsort((self.cols, self.rows))
            self.rows, self.cols, self.weights = self.rows[order], self.cols[order], self.weights[order]

    @property
    def nnz(self) -> int:
        return int(len(self.weights))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        for i, j, w in zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()):
            yield i, j, w

    def edge_dict(self) -> Dict[Tuple[int, int], float]:
        return {(i, j): w for i, j, w in self.edges()}

    def to_sparse(self) -> sp.csr_matrix:
        """Symmetric V x V CSR matrix with zero diagonal"""
        upper = sp.coo_matrix((self.weights, (self.rows, self.cols)), shape=(self.V, self.V))
        return (upper + upper.T).tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    @cached_property
    def row_scatter(self) -> sp.csr_matrix:
        """V x nnz incidence; row_scatter @ X sums per-edge rows of X onto each edge's row node"""
        return sp.csr_matrix((np.ones(self.nnz), (self.rows, np.arange(self.nnz))), shape=(self.V, self.nnz))

    @cached_property
    def col_scatter(self) -> sp.csr_matrix:
        """V x nnz incidence onto each edge's column node"""
        return sp.csr_matrix((np.ones(self.nnz), (self.cols, np.arange(self.nnz))), shape=(self.V, self.nnz))

    def strength(self) -> np.ndarray:
        """Weighted degree of every node"""
        return np.asarray(self.row_scatter @ self.weights + self.col_scatter @ self.weights).ravel()

    def summary(self) -> Dict[str, float]:
        return {'V': self.V, 'nnz': self.nnz, 'total_weight': self.total_weight}

    @classmethod
    def from_dense(cls, matrix: np.ndarray, vocab: Optional[Vocabulary] = None) -> 'CooccurrenceGraph':
        """Read the strict upper triangle of a dense matrix"""
        matrix = np.asarray(matrix, dtype=np.float64)
        V = matrix.shape[0]
        vocab = vocab or Vocabulary(f"w{i}" for i in range(V))
        rows, cols = np.triu_indices(V, k=1)
        values = matrix[rows, cols]
        keep = values > 0
        return cls(vocab, rows[keep], cols[keep], values[keep])


def load_domain_boost(path: Optional[str], default_factor: float = 2.0) -> Dict[str, float]:
    """Read `word` or `word<TAB>factor` lines into a salience multiplier map"""
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"Boost file not found: {path}")
    boosts = {}
    with open(path, encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, 1):
            entry = line.strip()
            if not entry or entry.startswith('#'):
                continue
            parts = entry.split('\t')
            factor = default_factor
            if len(parts) > 1:
                try:
                    factor = float(parts[1])
                except ValueError:
                    raise ConfigError(f"Boost file {path} line {line_number}: factor '{parts[1]}' is not a number")
            boosts[parts[0].strip().casefold()] = factor
    return boosts


def compute_salience(
    posts: List[TokenizedPost],
    vocab: Vocabulary,
    mode: str = 'capped_idf',
    cap: float = 3.0,
    boost: Optional[Dict[str, float]] = None
) -> np.ndarray:
    """
    Per-word salience s_i

    Args:
        posts: Tokenized corpus the vocabulary was built from
        vocab: Vocabulary
        mode: 'unit' (s = 1) or 'capped_idf' (s = min(cap, ln(N / df)))
        cap: Upper bound for capped IDF
        boost: Optional word -> multiplier map applied after the base score

    Returns:
        Length-V nonnegative vector
    """
    if not cap > 0:
        raise ConfigError(f"Salience cap must be > 0, got {cap}")
    if mode not in SALIENCE_MODES:
        raise ConfigError(f"Unknown salience mode '{mode}'")

    V = len(vocab)
    if mode == 'unit':
        salience = np.ones(V)
    else:
        df = np.zeros(V)
        for post in posts:
            for word in set(post.tokens):
                idx = vocab.get(word)
                if idx is None:
                    raise DataError(f"Token '{word}' of post {post.post_id} is not in the vocabulary")
                df[idx] += 1
        if np.any(df == 0):
            raise DataError("Vocabulary contains words that occur in no post")
        n_posts = len(posts)
        salience = np.array([min(cap, math.log(n_posts / d)) for d in df])

    for word, factor in (boost or {}).items():
        idx = vocab.get(word)
        if idx is not None:
            salience[idx] *= factor
    return salience


def adjacent_pairs(post: TokenizedPost, vocab: Vocabulary) -> Set[Tuple[int, int]]:
    """E_p: the set of unordered adjacent index pairs with distinct indices"""
    indices = [vocab.index[t] for t in post.tokens]
    pairs = set()
    for a, b in zip(indices, indices[1:]):
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return pairs


def build_graph(
    posts: List[TokenizedPost],
    weights: List[InfluenceWeight],
    salience: np.ndarray,
    vocab: Optional[Vocabulary] = None,
    fallback_uniform: bool = True
) -> CooccurrenceGraph:
    """
    Aggregate omega(i, j) = s_i s_j sum_p w_p delta_ij^(p)

    Args:
        posts: Tokenized corpus
        weights: Influence weights aligned with posts (same order, same post_id)
        salience: Length-V salience vector
        vocab: Vocabulary (rebuilt in first-occurrence order when None)
        fallback_uniform: Use w = 1 everywhere when every weight is zero

    Returns:
        CooccurrenceGraph holding only strictly positive edges
    """
    logger = get_logger()
    if vocab is None:
        vocab = Vocabulary(t for post in posts for t in post.tokens)
    if len(weights) != len(posts):
        raise DataError(f"Weights ({len(weights)}) and posts ({len(posts)}) are not aligned")
    for idx, (post, weight) in enumerate(zip(posts, weights)):
        if post.post_id != weight.post_id:
            raise DataError(f"post_id mismatch at position {idx}: '{post.post_id}' vs '{weight.post_id}'")
    salience = np.asarray(salience, dtype=np.float64)
    if salience.shape != (len(vocab),):
        raise DataError(f"Salience length {salience.shape[0]} does not match V={len(vocab)}")

    post_weights = [w.weight for w in weights]
    if all(w == 0.0 for w in post_weights):
        if fallback_uniform:
            logger.warning("All influence weights are zero; falling back to w = 1", posts=len(posts))
            post_weights = [1.0] * len(posts)
        else:
            logger.warning("All influence weights are zero; graph will be empty", posts=len(posts))

    accumulated: Dict[Tuple[int, int], float] = {}
    for post, w in zip(posts, post_weights):
        if w == 0.0 or post.no_bigram:
            continue
        for pair in sorted(adjacent_pairs(post, vocab)):
            accumulated[pair] = accumulated.get(pair, 0.0) + w

    rows, cols, values = [], [], []
    for (i, j) in sorted(accumulated):
        omega = salience[i] * salience[j] * accumulated[(i, j)]
        if omega > 0:
            rows.append(i)
            cols.append(j)
            values.append(omega)

    graph = CooccurrenceGraph(vocab, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                              np.array(values, dtype=np.float64))
    logger.info("Keyword graph built", **graph.summary())
    return graph


class GraphBuilder:
    def __init__(self, options: GraphOptions = None):
        """
        Initialize graph builder

        Args:
            options: Salience and weighting options
        """
        self.options = options or GraphOptions()

    def build(self, posts: List[TokenizedPost], vocab: Vocabulary,
              weights: List[InfluenceWeight]) -> CooccurrenceGraph:
        options = self.options
        boost = load_domain_boost(options.boost_path, options.boost_factor)
        salience = compute_salience(posts, vocab, options.salience, options.cap, boost)
        if not options.use_weights:
            weights = [InfluenceWeight(post_id=w.post_id, itf=w.itf, iidf=w.iidf, attention=w.attention,
                                       mean_gap=w.mean_gap, adjusted=w.adjusted, weight=1.0,
                                       pacing_imputed=w.pacing_imputed) for w in weights]
        return build_graph(posts, weights, salience, vocab=vocab, fallback_uniform=options.fallback_uniform)
