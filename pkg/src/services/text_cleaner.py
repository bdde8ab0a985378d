"""
Text Cleaning
Normalizes raw post text into token sequences and builds the vocabulary
"""
import os
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

import lxml.html
from lxml.etree import ParserError

from .errors import ConfigError, DataError
from .logger import get_logger
from .post_loader import Post


Tokenizer = Callable[[str], List[str]]

URL_PATTERN = re.compile(r'(?:https?://|www\.)\S+', re.IGNORECASE)
HANDLE_PATTERN = re.compile(r'@[^\W_][\w.\-]*')
HASHTAG_PATTERN = re.compile(r'#([^#\s]+)#?')
MARKUP_HINT = re.compile(r'<[a-zA-Z/!]|&#?\w+;')
WORD_PATTERN = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")

# Symbols, private use, surrogates and unassigned code points cover emoji
DROPPED_CATEGORIES = {'So', 'Sk', 'Co', 'Cs', 'Cn'}
CONTROL_CATEGORIES = {'Cc', 'Cf', 'Zl', 'Zp'}
VARIATION_SELECTORS = {chr(c) for c in range(0xFE00, 0xFE10)}


@dataclass
class TokenizedPost:
    post_id: str
    tokens: List[str] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.tokens)

    @property
    def no_bigram(self) -> bool:
        """Posts with fewer than two tokens contribute no edges"""
        return len(self.tokens) < 2


class Vocabulary:
    def __init__(self, entries: Iterable[str] = ()):
        """
        Ordered, duplicate-free word list with its index map

        Args:
            entries: Words in index order (duplicates keep their first position)
        """
        self.entries: List[str] = []
        self.index: Dict[str, int] = {}
        for word in entries:
            self.add(word)

    def add(self, word: str) -> int:
        if word not in self.index:
            self.index[word] = len(self.entries)
            self.entries.append(word)
        return self.index[word]

    def get(self, word: str) -> Optional[int]:
        return self.index.get(word)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, i: int) -> str:
        return self.entries[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.entries == other.entries


def whitespace_tokenizer(text: str) -> List[str]:
    """Default segmenter: unicode word runs, punctuation and underscores split"""
    return WORD_PATTERN.findall(text)


def jieba_tokenizer(text: str) -> List[str]:
    """Chinese word segmentation through jieba (imported on first use)"""
    import jieba
    return [t for t in (piece.strip() for piece in jieba.lcut(text)) if t and WORD_PATTERN.search(t)]


TOKENIZERS: Dict[str, Tokenizer] = {
    'whitespace': whitespace_tokenizer,
    'jieba': jieba_tokenizer,
}


def get_tokenizer(name: str) -> Tokenizer:
    if name not in TOKENIZERS:
        raise ConfigError(f"Unknown tokenizer '{name}' (expected one of {', '.join(TOKENIZERS)})")
    return TOKENIZERS[name]


def load_word_list(path: Optional[str]) -> Set[str]:
    """Read a UTF-8 file with one entry per line; blank lines and # comments are skipped"""
    if not path:
        return set()
    if not os.path.exists(path):
        raise ConfigError(f"Word list not found: {path}")
    words = set()
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            entry = line.strip()
            if entry and not entry.startswith('#'):
                words.add(entry.casefold())
    return words


def load_replacements(path: Optional[str]) -> Dict[str, str]:
    """Read a `variant<TAB>canonical` replacement dictionary"""
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"Replacement file not found: {path}")
    mapping = {}
    with open(path, encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, 1):
            entry = line.rstrip('\n')
            if not entry.strip() or entry.lstrip().startswith('#'):
                continue
            parts = entry.split('\t')
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ConfigError(f"Replacement file {path} line {line_number}: expected 'variant<TAB>canonical'")
            mapping[parts[0].strip().casefold()] = parts[1].strip().casefold()
    return mapping


class TextCleaner:
    def __init__(
        self,
        stop_words: Optional[Set[str]] = None,
        protected_terms: Optional[Set[str]] = None,
        replacements: Optional[Dict[str, str]] = None,
        tokenizer: Optional[Tokenizer] = None
    ):
        """
        Initialize text cleaner

        Args:
            stop_words: Words removed after normalization
            protected_terms: Domain terms that are never split or dropped
            replacements: Variant -> canonical token mapping
            tokenizer: Segmenter applied to cleaned text (default: unicode word runs)
        """
        self.stop_words = {w.casefold() for w in (stop_words or set())}
        self.protected_terms = {t.casefold().strip() for t in (protected_terms or set()) if t.strip()}
        self.replacements = dict(replacements or {})
        self.tokenizer = tokenizer or whitespace_tokenizer

        self.protected_pattern = None
        if self.protected_terms:
            alternatives = '|'.join(re.escape(t) for t in sorted(self.protected_terms, key=lambda t: (-len(t), t)))
            self.protected_pattern = re.compile(rf'(?<![^\W_])({alternatives})(?![^\W_])')

    def clean_text(self, raw_text: str) -> str:
        """Phase 1: strip markup, links, handles, emoji and control symbols; case-fold"""
        text = raw_text

        if MARKUP_HINT.search(text):
            try:
                text = lxml.html.fragment_fromstring(text, create_parent='div').text_content()
            except ParserError:
                pass

        text = URL_PATTERN.sub(' ', text)
        text = HANDLE_PATTERN.sub(' ', text)

        # "#service_delay" and Weibo-style "#topic#" keep their lexical content
        text = HASHTAG_PATTERN.sub(lambda m: ' ' + m.group(1).replace('_', ' ') + ' ', text)

        chars = []
        for ch in text:
            category = unicodedata.category(ch)
            if category in CONTROL_CATEGORIES:
                chars.append(' ')
            elif category in DROPPED_CATEGORIES or ch in VARIATION_SELECTORS:
                chars.append(' ')
            else:
                chars.append(ch)
        text = unicodedata.normalize('NFKC', ''.join(chars))

        return re.sub(r'\s+', ' ', text.casefold()).strip()

    def _segment(self, text: str) -> List[Tuple[str, bool]]:
        """Phase 2: tokenize, keeping protected terms whole. Returns (token, is_protected)"""
        if not self.protected_pattern:
            return [(t, False) for t in self.tokenizer(text)]

        pieces = self.protected_pattern.split(text)
        tokens = []
        for i, piece in enumerate(pieces):
            if i % 2 == 1:
                tokens.append((piece, True))
            elif piece.strip():
                tokens.extend((t, False) for t in self.tokenizer(piece))
        return tokens

    def _filter(self, tokens: List[Tuple[str, bool]]) -> List[str]:
        kept = []
        for token, protected in tokens:
            token = token.strip()
            if not token:
                continue
            if protected:
                kept.append(token)
                continue
            if URL_PATTERN.fullmatch(token) or HANDLE_PATTERN.fullmatch(token):
                continue
            token = self.replacements.get(token, token)
            if token in self.protected_terms:
                kept.append(token)
            elif token not in self.stop_words:
                kept.append(token)
        return kept

    def tokenize_post(self, post: Post) -> TokenizedPost:
        """Clean and tokenize one post (pre-segmented tokens bypass segmentation)"""
        if post.tokens is not None:
            segmented = []
            for raw in post.tokens:
                token = raw.casefold().strip()
                segmented.append((token, token in self.protected_terms))
        else:
            segmented = self._segment(self.clean_text(post.text))
        return TokenizedPost(post_id=post.post_id, tokens=self._filter(segmented))

    def preprocess(self, posts: List[Post]) -> Tuple[List[TokenizedPost], Vocabulary]:
        """
        Tokenize every post and build the vocabulary in first-occurrence order

        Args:
            posts: Ingested posts

        Returns:
            Tuple of (one TokenizedPost per input post, Vocabulary)
        """
        tokenized = [self.tokenize_post(post) for post in posts]

        vocab = Vocabulary()
        for item in tokenized:
            for token in item.tokens:
                vocab.add(token)

        if len(vocab) == 0:
            raise DataError("no usable posts")

        no_bigram = sum(1 for item in tokenized if item.no_bigram)
        if no_bigram:
            get_logger().warning("Posts with fewer than 2 tokens kept without bigrams",
                                 flagged=no_bigram, posts=len(tokenized))
        get_logger().info("Corpus preprocessed", posts=len(tokenized), vocabulary=len(vocab))
        return tokenized, vocab


def preprocess(
    posts: List[Post],
    stop_words: Optional[Set[str]] = None,
    protected_terms: Optional[Set[str]] = None,
    tokenizer: Optional[Tokenizer] = None,
    replacements: Optional[Dict[str, str]] = None
) -> Tuple[List[TokenizedPost], Vocabulary]:
    """Functional entry point over TextCleaner.preprocess"""
    cleaner = TextCleaner(stop_words=stop_words, protected_terms=protected_terms,
                          replacements=replacements, tokenizer=tokenizer)
    return cleaner.preprocess(posts)
