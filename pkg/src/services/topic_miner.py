"""
Event Mining
Assigns posts to dominant topics, extracts event keywords and ranks topics by importance
"""
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .logger import get_logger
from .pdf_solver import FactorModel
from .text_cleaner import TokenizedPost, Vocabulary


@dataclass
class MiningOptions:
    n_top_posts: int = 20
    n_keywords: int = 10
    weighted_activity: bool = False
    display_m: int = 8

    def __post_init__(self):
        for name in ('n_top_posts', 'n_keywords', 'display_m'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass
class PostTopicActivity:
    post_id: str
    x: np.ndarray
    dominant: Optional[int]

    @property
    def excluded(self) -> bool:
        """No in-vocabulary token: no dominant topic"""
        return self.dominant is None

    @property
    def max_activity(self) -> float:
        return float(self.x.max()) if self.x.size else 0.0


@dataclass
class TopicReport:
    topic_id: int
    importance: float
    top_words: List[str]
    event_keywords: List[Tuple[str, int]] = field(default_factory=list)
    n_assigned_posts: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'topic_id': self.topic_id,
            'importance': self.importance,
            'top_words': self.top_words,
            'event_keywords': [[w, c] for w, c in self.event_keywords],
            'n_assigned_posts': self.n_assigned_posts,
        }


def activity(post: TokenizedPost, model: FactorModel, vocab: Vocabulary, weighted: bool = False) -> PostTopicActivity:
    """
    x_p[k] = sum over the post's in-vocabulary tokens of u_{pi(t), k}

    Args:
        post: Tokenized post
        model: Fitted model
        vocab: Vocabulary the model was fitted on (out-of-vocabulary tokens are skipped)
        weighted: Multiply each x_p[k] by a_k

    Returns:
        PostTopicActivity; dominant is None when no token is in the vocabulary
    """
    indices = [vocab.index[t] for t in post.tokens if t in vocab]
    if not indices:
        return PostTopicActivity(post_id=post.post_id, x=np.zeros(model.K), dominant=None)
    x = model.U[indices].sum(axis=0)
    if weighted:
        x = x * model.A
    # argmax returns the first maximum, i.e. the smallest topic index on ties
    return PostTopicActivity(post_id=post.post_id, x=x, dominant=int(np.argmax(x)))


def assign(posts: List[TokenizedPost], model: FactorModel, vocab: Vocabulary,
           weighted: bool = False) -> List[PostTopicActivity]:
    assignments = [activity(post, model, vocab, weighted) for post in posts]
    excluded = sum(1 for a in assignments if a.excluded)
    if excluded:
        get_logger().warning("Posts without in-vocabulary tokens excluded from topics",
                             excluded=excluded, posts=len(posts))
    return assignments


def cluster_sizes(assignments: List[PostTopicActivity], K: int) -> Dict[str, Any]:
    sizes = [0] * K
    for item in assignments:
        if not item.excluded:
            sizes[item.dominant] += 1
    return {'sizes': sizes, 'excluded': sum(1 for a in assignments if a.excluded)}


def event_keywords(
    assignments: List[PostTopicActivity],
    posts: List[TokenizedPost],
    topic: int,
    n_top_posts: int = 20,
    n_keywords: int = 10,
    stop_words: Optional[Set[str]] = None,
    place_names: Optional[Set[str]] = None
) -> List[Tuple[str, int]]:
    """
    Frequent content words of the posts most activated by a topic

    Args:
        assignments: Activities aligned with posts
        posts: Tokenized posts
        topic: Topic index
        n_top_posts: Posts kept, by descending x_p[topic] among posts whose dominant topic is `topic`
        n_keywords: Keywords returned
        stop_words: Function words to drop
        place_names: Place names to drop

    Returns:
        List of (keyword, count), most frequent first, ties by word
    """
    if len(assignments) != len(posts):
        raise DataError("Assignments and posts are not aligned")
    members = [(a.x[topic], i) for i, a in enumerate(assignments) if a.dominant == topic]
    if not members:
        get_logger().warning("Topic has no assigned posts; no event keywords", topic=topic)
        return []
    members.sort(key=lambda item: (-item[0], item[1]))

    dropped = {w.casefold() for w in (stop_words or set())} | {w.casefold() for w in (place_names or set())}
    counts: Counter = Counter()
    for _, i in members[:n_top_posts]:
        counts.update(t for t in posts[i].tokens if t.casefold() not in dropped and any(ch.isalnum() for ch in t))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:n_keywords]


def rank_topics(model: FactorModel, vocab: Vocabulary, m: int = 8) -> List[TopicReport]:
    """Topics by descending a_k (stable on ties), each with its top-m words from U"""
    m = min(m, len(vocab))
    order = sorted(range(model.K), key=lambda k: -model.A[k])
    reports = []
    for k in order:
        words = np.argsort(-model.U[:, k], kind='stable')[:m]
        reports.append(TopicReport(topic_id=k, importance=float(model.A[k]), top_words=[vocab[i] for i in words]))
    return reports


class TopicMiner:
    def __init__(self, options: MiningOptions = None, stop_words: Optional[Set[str]] = None,
                 place_names: Optional[Set[str]] = None):
        """
        Initialize topic miner

        Args:
            options: Keyword extraction and display settings
            stop_words: Function words dropped from event keywords
            place_names: Place names dropped from event keywords
        """
        self.options = options or MiningOptions()
        self.stop_words = stop_words or set()
        self.place_names = place_names or set()
        self.logger = get_logger()

    def mine(self, model: FactorModel, vocab: Vocabulary,
             posts: List[TokenizedPost]) -> Tuple[List[TopicReport], List[PostTopicActivity]]:
        options = self.options
        assignments = assign(posts, model, vocab, options.weighted_activity)
        sizes = cluster_sizes(assignments, model.K)['sizes']

        reports = rank_topics(model, vocab, options.display_m)
        for report in reports:
            report.n_assigned_posts = sizes[report.topic_id]
            report.event_keywords = event_keywords(assignments, posts, report.topic_id, options.n_top_posts,
                                                   options.n_keywords, self.stop_words, self.place_names)

        self.logger.info("Topics mined", topics=len(reports), assigned=sum(sizes),
                         excluded=len(assignments) - sum(sizes))
        return reports, assignments
