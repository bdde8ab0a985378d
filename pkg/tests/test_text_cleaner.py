import os
from dataclasses import replace

import pytest

from services.errors import ConfigError, DataError
from services.post_loader import ingest
from services.text_cleaner import (
    TextCleaner,
    Vocabulary,
    get_tokenizer,
    load_replacements,
    load_word_list,
    preprocess,
)
from conftest import DATA_DIR


MINI_VOCABULARY = [
    'signal', 'failure', 'line', 'two', 'trains', 'delayed', 'xiamen', 'station', 'metro', 'delay',
    'means', 'everyone', 'rush', 'hour', 'crowding', 'shanghai', 'carriages', 'packed', 'every', 'commute',
    'platform', 'ticket', 'app', 'crashed', 'cannot', 'buy', 'gate', 'fare', 'refund', 'please',
    'beijing', 'increase', 'problems', 'fixed', 'over', 'running',
]


class TestCleaning:
    def test_links_handles_and_hashtags(self, make_post):
        cleaner = TextCleaner(stop_words={'check'})
        tokenized = cleaner.tokenize_post(make_post(text="Check https://t.co/x @bob #service_delay!!"))
        assert tokenized.tokens == ['service', 'delay']

    def test_markup_and_entities(self, make_post):
        cleaner = TextCleaner()
        tokenized = cleaner.tokenize_post(make_post(text="<b>Fare</b> &amp; ticket"))
        assert tokenized.tokens == ['fare', 'ticket']

    def test_emoji_removed(self, make_post):
        tokenized = TextCleaner().tokenize_post(make_post(text="packed 😡 carriages 🚇"))
        assert tokenized.tokens == ['packed', 'carriages']

    def test_single_token_post_flagged(self, make_post):
        tokenized = TextCleaner().tokenize_post(make_post(text="Delay"))
        assert tokenized.length == 1
        assert tokenized.no_bigram

    def test_protected_terms_stay_whole(self, make_post):
        cleaner = TextCleaner(stop_words={'in'}, protected_terms={'rush hour'})
        tokenized = cleaner.tokenize_post(make_post(text="Rush hour crowding in Shanghai"))
        assert tokenized.tokens == ['rush hour', 'crowding', 'shanghai']

    def test_replacements_applied(self, make_post):
        replacements = load_replacements(os.path.join(DATA_DIR, 'replacements.tsv'))
        tokenized = TextCleaner(replacements=replacements).tokenize_post(make_post(text="Subway delays"))
        assert tokenized.tokens == ['metro', 'delay']

    def test_pre_segmented_tokens_bypass_segmentation(self, make_post):
        cleaner = TextCleaner(stop_words={'the'})
        tokenized = cleaner.tokenize_post(make_post(text="ignored", tokens=['The', 'Metro', 'delay']))
        assert tokenized.tokens == ['metro', 'delay']


class TestPreprocess:
    def test_mini_corpus_vocabulary(self, mini_corpus_path, stop_words):
        tokenized, vocab = preprocess(ingest(mini_corpus_path), stop_words=stop_words)
        assert len(tokenized) == 12
        assert len(vocab) == 36
        assert vocab.entries == MINI_VOCABULARY

    def test_mini_corpus_tokens(self, mini_corpus_path, stop_words):
        tokenized, _ = preprocess(ingest(mini_corpus_path), stop_words=stop_words)
        assert tokenized[0].tokens == ['signal', 'failure', 'line', 'two', 'trains', 'delayed',
                                       'xiamen', 'station', 'metro', 'delay']
        assert tokenized[2].tokens == ['signal', 'failure', 'means', 'delay', 'everyone']
        assert tokenized[9].tokens == ['delay']
        assert tokenized[9].no_bigram
        assert tokenized[10].tokens == ['signal', 'failure', 'fixed', 'line', 'two', 'delay',
                                        'over', 'trains', 'running']

    def test_rendered_tokens_preprocess_to_themselves(self, mini_corpus_path, stop_words):
        cleaner = TextCleaner(
            stop_words=stop_words,
            protected_terms=set(load_word_list(os.path.join(DATA_DIR, 'protected_terms.txt'))),
            replacements=load_replacements(os.path.join(DATA_DIR, 'replacements.tsv'))
        )
        posts = ingest(mini_corpus_path)
        first, first_vocab = cleaner.preprocess(posts)
        rendered = [replace(post, text=' '.join(item.tokens), tokens=None) for post, item in zip(posts, first)]
        second, second_vocab = cleaner.preprocess(rendered)
        assert [item.tokens for item in second] == [item.tokens for item in first]
        assert second_vocab.entries == first_vocab.entries
        assert 'signal failure' in first_vocab.entries

    def test_empty_corpus(self, make_post):
        with pytest.raises(DataError, match="no usable posts"):
            preprocess([make_post(text="the and of")], stop_words={'the', 'and', 'of'})

    def test_vocabulary_first_occurrence_order(self):
        vocab = Vocabulary(['b', 'a', 'b', 'c'])
        assert vocab.entries == ['b', 'a', 'c']
        assert vocab.index == {'b': 0, 'a': 1, 'c': 2}


class TestResources:
    def test_word_list_skips_comments(self, stop_words):
        assert 'the' in stop_words
        assert not any(w.startswith('#') for w in stop_words)

    def test_missing_word_list(self, tmp_path):
        with pytest.raises(ConfigError):
            load_word_list(str(tmp_path / 'absent.txt'))

    def test_malformed_replacements(self, tmp_path):
        path = tmp_path / 'bad.tsv'
        path.write_text("only-one-column\n", encoding='utf-8')
        with pytest.raises(ConfigError):
            load_replacements(str(path))

    def test_unknown_tokenizer(self):
        with pytest.raises(ConfigError):
            get_tokenizer('bpe')
