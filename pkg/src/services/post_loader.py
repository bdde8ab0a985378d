"""
Post Ingestion
Loads collected social-media records from JSONL or CSV files into Post objects
"""
import csv
import json
import os
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError, ParseError
from .logger import get_logger


REQUIRED_FIELDS = ('post_id', 'timestamp', 'text', 'likes', 'comments', 'followers')
SUPPORTED_FORMATS = ('jsonl', 'csv')


@dataclass
class Post:
    post_id: str
    timestamp: datetime
    text: str
    likes: int
    comments: int
    followers: int
    reposts: int = 0
    comment_times: Optional[List[datetime]] = None
    platform: str = ''
    tokens: Optional[List[str]] = None

    def __post_init__(self):
        if not self.post_id:
            raise DataError("post_id must be nonempty")
        for name in ('likes', 'comments', 'reposts', 'followers'):
            if getattr(self, name) < 0:
                raise DataError(f"Post {self.post_id}: {name} must be >= 0")
        if self.comment_times:
            for earlier, later in zip(self.comment_times, self.comment_times[1:]):
                if later < earlier:
                    raise DataError(f"Post {self.post_id}: comment_times must be nondecreasing")

    def to_record(self) -> Dict[str, Any]:
        """Render as a JSONL record using the ingest schema"""
        record = {
            'post_id': self.post_id,
            'timestamp': _format_time(self.timestamp),
            'text': self.text,
            'likes': self.likes,
            'comments': self.comments,
            'reposts': self.reposts,
            'followers': self.followers,
            'platform': self.platform,
        }
        if self.comment_times is not None:
            record['comment_times'] = [_format_time(t) for t in self.comment_times]
        if self.tokens is not None:
            record['tokens'] = list(self.tokens)
        return record


def _format_time(value: datetime) -> str:
    """RFC3339 in UTC, keeping microseconds whenever the instant has them"""
    value = value.astimezone(timezone.utc)
    if value.microsecond:
        return value.strftime('%Y-%m-%dT%H:%M:%S.%fZ')
    return value.strftime('%Y-%m-%dT%H:%M:%SZ')


def _parse_time(value: Any, line: int, field_name: str) -> datetime:
    try:
        stamp = pd.Timestamp(str(value).strip())
    except (ValueError, TypeError) as e:
        raise ParseError(line, field_name, f"is not an RFC3339 timestamp ({value!r}): {e}")
    if pd.isna(stamp):
        raise ParseError(line, field_name, "is empty")
    stamp = stamp.tz_localize('UTC') if stamp.tzinfo is None else stamp.tz_convert('UTC')
    return stamp.to_pydatetime()


def _parse_count(value: Any, line: int, field_name: str) -> int:
    if isinstance(value, bool):
        raise ParseError(line, field_name, f"must be a nonnegative integer, got {value!r}")
    if isinstance(value, int):
        count = value
    elif isinstance(value, float) and value.is_integer():
        count = int(value)
    else:
        text = str(value).strip()
        try:
            count = int(text)
        except ValueError:
            try:
                as_float = float(text)
            except ValueError:
                raise ParseError(line, field_name, f"must be a nonnegative integer, got {value!r}")
            if not as_float.is_integer():
                raise ParseError(line, field_name, f"must be a nonnegative integer, got {value!r}")
            count = int(as_float)
    if count < 0:
        raise ParseError(line, field_name, f"must be >= 0, got {count}")
    return count


def _split_list(value: Any) -> Optional[List[str]]:
    """Lists arrive as JSON arrays or as `|`-separated CSV cells"""
    if value is None:
        return None
    if isinstance(value, list):
        return [str(v) for v in value]
    text = str(value).strip()
    if not text:
        return None
    return [part.strip() for part in text.split('|') if part.strip()]


def record_to_post(record: Dict[str, Any], line: int) -> Post:
    for name in REQUIRED_FIELDS:
        value = record.get(name)
        if value is None or (isinstance(value, str) and not value.strip() and name != 'text'):
            raise ParseError(line, name, "is missing")

    post_id = str(record['post_id']).strip()
    if not post_id:
        raise ParseError(line, 'post_id', "is empty")

    reposts_raw = record.get('reposts')
    reposts = 0 if reposts_raw in (None, '') else _parse_count(reposts_raw, line, 'reposts')

    raw_times = _split_list(record.get('comment_times'))
    comment_times = None
    if raw_times is not None:
        comment_times = [_parse_time(t, line, 'comment_times') for t in raw_times]
        for earlier, later in zip(comment_times, comment_times[1:]):
            if later < earlier:
                raise ParseError(line, 'comment_times', "must be nondecreasing")

    return Post(
        post_id=post_id,
        timestamp=_parse_time(record['timestamp'], line, 'timestamp'),
        text=str(record['text']),
        likes=_parse_count(record['likes'], line, 'likes'),
        comments=_parse_count(record['comments'], line, 'comments'),
        reposts=reposts,
        followers=_parse_count(record['followers'], line, 'followers'),
        comment_times=comment_times,
        platform=str(record.get('platform') or ''),
        tokens=_split_list(record.get('tokens')),
    )


def _read_jsonl(path: str) -> List[Tuple[int, Dict[str, Any]]]:
    rows = []
    with open(path, encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(line_number, 'json', f"could not be decoded: {e.msg}")
            if not isinstance(record, dict):
                raise ParseError(line_number, 'json', "is not an object")
            rows.append((line_number, record))
    return rows


def _read_csv(path: str) -> List[Tuple[int, Dict[str, Any]]]:
    rows = []
    with open(path, encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for name in REQUIRED_FIELDS:
            if name not in header:
                raise ParseError(1, name, "column is missing from the header")
        for record in reader:
            rows.append((reader.line_num, record))
    return rows


def infer_format(path: str, fmt: Optional[str] = None) -> str:
    """Resolve the input format from an explicit value or the file extension"""
    if fmt is None:
        ext = os.path.splitext(path)[1].lower().lstrip('.')
        fmt = {'jsonl': 'jsonl', 'json': 'jsonl', 'ndjson': 'jsonl', 'csv': 'csv'}.get(ext, ext)
    fmt = fmt.lower()
    if fmt not in SUPPORTED_FORMATS:
        raise ConfigError(f"Unknown input format '{fmt}' (expected one of {', '.join(SUPPORTED_FORMATS)})")
    return fmt


def load_posts(path: str, fmt: Optional[str] = None) -> Tuple[List[Post], int]:
    """
    Load posts and collapse exact duplicates

    Args:
        path: Input file path
        fmt: 'jsonl' or 'csv' (inferred from the extension when None)

    Returns:
        Tuple of (posts in file order, number of duplicate records removed)
    """
    fmt = infer_format(path, fmt)
    if not os.path.exists(path):
        raise DataError(f"Input file not found: {path}")

    rows = _read_jsonl(path) if fmt == 'jsonl' else _read_csv(path)

    posts = []
    seen = set()
    duplicates = 0
    for line_number, record in rows:
        post = record_to_post(record, line_number)
        key = (post.post_id, post.text)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        posts.append(post)

    get_logger().info("Posts ingested", path=path, format=fmt,
                      records=len(rows), posts=len(posts), duplicates=duplicates)
    return posts, duplicates


def ingest(path: str, fmt: Optional[str] = None) -> List[Post]:
    """Load one Post per record, identical (post_id, text) records collapsed to one"""
    posts, _ = load_posts(path, fmt)
    return posts


def _median_iqr(values: List[float]) -> Dict[str, float]:
    if not values:
        return {'median': 0.0, 'q1': 0.0, 'q3': 0.0}
    q1, median, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return {'median': float(median), 'q1': float(q1), 'q3': float(q3)}


def corpus_stats(posts: List[Post], n_duplicates: int = 0) -> Dict[str, Any]:
    """
    Summarize a corpus: posts per account, engagement median [IQR] and duplicate share

    Args:
        posts: Deduplicated posts
        n_duplicates: Records removed by deduplication

    Returns:
        Dictionary with post/account counts, engagement median [IQR] and duplicate share
    """
    per_account = Counter(post.post_id for post in posts)
    total_records = len(posts) + n_duplicates
    return {
        'posts': len(posts),
        'unique_accounts': len(per_account),
        'posts_per_account': _median_iqr(list(per_account.values())),
        'max_posts_by_account': max(per_account.values()) if per_account else 0,
        'likes': _median_iqr([p.likes for p in posts]),
        'comments': _median_iqr([p.comments for p in posts]),
        'followers': _median_iqr([p.followers for p in posts]),
        'duplicates': {
            'n': n_duplicates,
            'percent': round(100.0 * n_duplicates / total_records, 2) if total_records else 0.0,
        },
    }
