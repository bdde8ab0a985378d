import os
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from services.graph_builder import CooccurrenceGraph
from services.post_loader import Post
from services.text_cleaner import Vocabulary, load_word_list


ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(ROOT, 'data')

BLOCK_SIZE = 5
PLANTED_A = (3.0, 2.0, 1.0)


@pytest.fixture
def mini_corpus_path():
    return os.path.join(DATA_DIR, 'mini_corpus.jsonl')


@pytest.fixture
def stop_words_path():
    return os.path.join(DATA_DIR, 'stop_words_en.txt')


@pytest.fixture
def stop_words(stop_words_path):
    return load_word_list(stop_words_path)


@pytest.fixture
def make_post():
    """Post factory with zero engagement defaults"""
    base = datetime(2024, 3, 4, 10, 0, tzinfo=timezone.utc)

    def factory(post_id='p1', text='delay', likes=0, comments=0, reposts=0, followers=0,
                comment_minutes=None, tokens=None):
        comment_times = None
        if comment_minutes is not None:
            comment_times = [base + timedelta(minutes=m) for m in comment_minutes]
        return Post(post_id=post_id, timestamp=base, text=text, likes=likes, comments=comments,
                    reposts=reposts, followers=followers, comment_times=comment_times, tokens=tokens)

    return factory


def planted_blocks(a=PLANTED_A, block_size=BLOCK_SIZE):
    """Indicator-block U (V x K) and the graph holding the off-diagonal upper triangle of U diag(a) U^T"""
    K = len(a)
    V = K * block_size
    U = np.zeros((V, K))
    for k in range(K):
        U[k * block_size:(k + 1) * block_size, k] = 1.0
    dense = (U * np.asarray(a)) @ U.T
    np.fill_diagonal(dense, 0.0)
    vocab = Vocabulary(f"b{k}w{i}" for k in range(K) for i in range(block_size))
    return CooccurrenceGraph.from_dense(dense, vocab), U


def random_graph(V, density, rng, low=0.5, high=2.0):
    """Random sparse symmetric graph with at least one edge"""
    rows, cols = np.triu_indices(V, k=1)
    keep = rng.random(len(rows)) < density
    keep[rng.integers(len(rows))] = True
    weights = rng.uniform(low, high, size=int(keep.sum()))
    vocab = Vocabulary(f"w{i}" for i in range(V))
    return CooccurrenceGraph(vocab, rows[keep], cols[keep], weights)


@pytest.fixture
def planted():
    return planted_blocks()


@pytest.fixture
def graph_factory():
    return random_graph
