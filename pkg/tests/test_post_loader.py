from datetime import datetime, timezone

import pytest

from services.errors import ConfigError, DataError, ParseError
from services.post_loader import corpus_stats, ingest, load_posts, record_to_post


CSV_HEADER = "post_id,timestamp,text,likes,comments,followers\n"


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding='utf-8')
    return str(path)


class TestCsvIngest:
    def test_exact_duplicate_collapsed(self, tmp_path):
        path = write(tmp_path, 'posts.csv', CSV_HEADER +
                     "a1,2024-03-04T10:00:00Z,line two delay,3,1,10\n"
                     "a1,2024-03-04T10:00:00Z,line two delay,3,1,10\n"
                     "a2,2024-03-04T11:00:00Z,fare increase,0,0,5\n")
        posts, duplicates = load_posts(path)
        assert [p.post_id for p in posts] == ['a1', 'a2']
        assert duplicates == 1

    def test_same_account_different_text_kept(self, tmp_path):
        path = write(tmp_path, 'posts.csv', CSV_HEADER +
                     "a1,2024-03-04T10:00:00Z,line two delay,3,1,10\n"
                     "a1,2024-03-04T12:00:00Z,still delayed,3,1,10\n")
        assert len(ingest(path)) == 2

    def test_bad_count_names_field_and_line(self, tmp_path):
        path = write(tmp_path, 'posts.csv', CSV_HEADER + "a1,2024-03-04T10:00:00Z,delay,abc,1,10\n")
        with pytest.raises(ParseError) as excinfo:
            load_posts(path)
        assert excinfo.value.field == 'likes'
        assert excinfo.value.line == 2
        assert "likes" in str(excinfo.value)

    def test_missing_required_column(self, tmp_path):
        path = write(tmp_path, 'posts.csv', "post_id,timestamp,text,likes,comments\n")
        with pytest.raises(ParseError) as excinfo:
            load_posts(path)
        assert excinfo.value.field == 'followers'

    def test_pipe_separated_comment_times(self, tmp_path):
        path = write(tmp_path, 'posts.csv', "post_id,timestamp,text,likes,comments,followers,comment_times\n"
                     "a1,2024-03-04T10:00:00Z,delay,0,2,10,2024-03-04T10:05:00Z|2024-03-04T10:35:00Z\n")
        (post,) = ingest(path)
        assert len(post.comment_times) == 2


class TestRecordValidation:
    def test_negative_count_rejected(self):
        record = {'post_id': 'a', 'timestamp': '2024-03-04T10:00:00Z', 'text': 'x',
                  'likes': -1, 'comments': 0, 'followers': 0}
        with pytest.raises(ParseError):
            record_to_post(record, 7)

    def test_decreasing_comment_times_rejected(self):
        record = {'post_id': 'a', 'timestamp': '2024-03-04T10:00:00Z', 'text': 'x', 'likes': 0,
                  'comments': 2, 'followers': 0,
                  'comment_times': ['2024-03-04T11:00:00Z', '2024-03-04T10:00:00Z']}
        with pytest.raises(ParseError) as excinfo:
            record_to_post(record, 3)
        assert excinfo.value.field == 'comment_times'

    def test_missing_reposts_default_to_zero(self):
        record = {'post_id': 'a', 'timestamp': '2024-03-04T10:00:00Z', 'text': 'x',
                  'likes': 1, 'comments': 0, 'followers': 4}
        post = record_to_post(record, 1)
        assert post.reposts == 0
        assert post.comment_times is None

    def test_unknown_format(self, tmp_path):
        path = write(tmp_path, 'posts.txt', "")
        with pytest.raises(ConfigError):
            load_posts(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_posts(str(tmp_path / 'absent.jsonl'))


class TestMiniCorpus:
    def test_twelve_posts(self, mini_corpus_path):
        posts, duplicates = load_posts(mini_corpus_path)
        assert len(posts) == 12
        assert duplicates == 0

    def test_field_values(self, mini_corpus_path):
        posts = ingest(mini_corpus_path)
        first = posts[0]
        assert first.post_id == 'acct01'
        assert first.timestamp == datetime(2024, 3, 4, 7, 15, tzinfo=timezone.utc)
        assert (first.likes, first.comments, first.reposts, first.followers) == (120, 3, 10, 5000)
        assert len(first.comment_times) == 3
        assert first.platform == 'weibo'

        assert posts[1].comment_times is None
        assert posts[4].reposts == 0
        assert posts[9].post_id == 'acct01'
        assert posts[9].text == 'Delay again!!'
        assert len(posts[10].comment_times) == 2

    def test_corpus_stats(self, mini_corpus_path):
        posts, duplicates = load_posts(mini_corpus_path)
        stats = corpus_stats(posts, duplicates)
        assert stats['posts'] == 12
        assert stats['unique_accounts'] == 11
        assert stats['max_posts_by_account'] == 2
        assert stats['duplicates'] == {'n': 0, 'percent': 0.0}
