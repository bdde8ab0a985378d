"""
Influence Weighting
Computes the static per-post influence weight from engagement, reach and comment pacing
"""
import math
from dataclasses import dataclass, asdict
from typing import Dict, List, Tuple

from .errors import ConfigError, DataError
from .logger import get_logger
from .post_loader import Post


# Floor on the commenting duration in tau0 units; bursts shorter than this count as one instant
ZERO_GAP_FLOOR = 1e-6


@dataclass
class InfluenceParams:
    eps_f: float = 1.0
    tau0: float = 1.0
    decay_g: float = 1.5
    hn_shift: float = 2.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigError(f"Influence parameter {name} must be > 0, got {value}")


@dataclass
class InfluenceWeight:
    post_id: str
    itf: float
    iidf: float
    attention: float
    mean_gap: float
    adjusted: float
    weight: float
    pacing_imputed: bool = False


def compute_itf(post: Post, params: InfluenceParams) -> float:
    """Engagement per reach: (c + l + r) / (F + eps_f)"""
    return (post.comments + post.likes + post.reposts) / (post.followers + params.eps_f)


def compute_gaps(post: Post, params: InfluenceParams) -> Tuple[int, List[float]]:
    """
    Comment count and inter-comment gaps in hours

    Args:
        post: Post with optional comment_times
        params: Influence parameters (tau0 fills missing gaps)

    Returns:
        Tuple of (T_p, gaps); gaps always has max(1, T_p - 1) entries
    """
    if post.comment_times is not None:
        times = post.comment_times
        count = len(times)
        if count < 2:
            return count, [params.tau0]
        gaps = []
        for earlier, later in zip(times, times[1:]):
            delta = (later - earlier).total_seconds() / 3600.0
            if delta < 0:
                raise DataError(f"Post {post.post_id}: comment timestamps decrease")
            gaps.append(delta)
        return count, gaps

    # Counts only: pacing is imputed as one time unit per gap
    count = post.comments
    if count < 2:
        return count, [params.tau0]
    return count, [params.tau0] * (count - 1)


def compute_iidf(count: int, gaps: List[float], params: InfluenceParams) -> float:
    """Arrival-rate factor: log(1 + T / duration), total duration for T >= 3, largest gap below"""
    if not gaps:
        raise DataError("compute_iidf needs at least one gap")
    if count >= 3:
        duration = sum(gaps) / params.tau0
    else:
        duration = max(gaps) / params.tau0
    duration = max(duration, ZERO_GAP_FLOOR)
    return math.log1p(count / duration)


def mean_gap(gaps: List[float]) -> float:
    """Average inter-comment interval over the max(1, T - 1) gaps"""
    return sum(gaps) / len(gaps)


def adjusted_weight(attention: float, mean_gap_hours: float, params: InfluenceParams) -> float:
    """Hacker-News style decay: Y / (mean_gap / tau0 + shift) ** g"""
    return attention / (mean_gap_hours / params.tau0 + params.hn_shift) ** params.decay_g


def normalize_weights(adjusted: List[float]) -> List[float]:
    """Max-normalize to [0, 1]; an all-zero corpus maps to all zeros"""
    peak = max(adjusted)
    if peak <= 0:
        return [0.0] * len(adjusted)
    return [value / peak for value in adjusted]


def compute_weight(posts: List[Post], params: InfluenceParams) -> List[InfluenceWeight]:
    """
    Influence weight for every post

    Args:
        posts: Nonempty list of posts
        params: Influence parameters

    Returns:
        One InfluenceWeight per post, in input order
    """
    if not posts:
        raise DataError("compute_weight needs at least one post")

    partial = []
    for post in posts:
        count, gaps = compute_gaps(post, params)
        itf = compute_itf(post, params)
        iidf = compute_iidf(count, gaps, params)
        attention = itf * iidf
        gap = mean_gap(gaps)
        partial.append(InfluenceWeight(
            post_id=post.post_id,
            itf=itf,
            iidf=iidf,
            attention=attention,
            mean_gap=gap,
            adjusted=adjusted_weight(attention, gap, params),
            weight=0.0,
            pacing_imputed=post.comment_times is None and post.comments >= 2,
        ))

    for item, weight in zip(partial, normalize_weights([p.adjusted for p in partial])):
        item.weight = weight

    imputed = sum(1 for p in partial if p.pacing_imputed)
    if imputed:
        get_logger().warning("Comment pacing imputed from counts", posts=imputed, tau0=params.tau0)
    if all(p.weight == 0.0 for p in partial):
        get_logger().warning("Every post has zero adjusted weight", posts=len(partial))
    return partial


class InfluenceService:
    def __init__(self, params: InfluenceParams = None):
        """
        Initialize influence service

        Args:
            params: Influence parameters (defaults: eps_f=1, tau0=1h, g=1.5, shift=2)
        """
        self.params = params or InfluenceParams()

    def weigh(self, posts: List[Post]) -> List[InfluenceWeight]:
        return compute_weight(posts, self.params)

    @staticmethod
    def summarize(weights: List[InfluenceWeight]) -> Dict[str, float]:
        values = [w.weight for w in weights]
        return {
            'posts': len(values),
            'nonzero': sum(1 for v in values if v > 0),
            'mean_weight': sum(values) / len(values) if values else 0.0,
            'imputed_pacing': sum(1 for w in weights if w.pacing_imputed),
        }
