"""External NLP providers behind small deterministic interfaces.

The feature extractor needs five capabilities: embeddings, translation,
transliteration, NER, and POS tagging. Real models stay outside the core;
they attach either as TSV lookup tables or as external processes speaking
line-delimited JSON on stdin/stdout. Builtin fallbacks keep the pipeline
runnable with no downloads:

- translator: returns "" (no translation, similarity 0)
- transliterator: rule-based Latin-to-Arabic character mapping
- ner: always "none"
- pos tagger: always "misc"
- embedder: hashed character n-grams, unit-length (deterministic but
  NON-SEMANTIC: it measures character overlap, for tests and plumbing only)

All provider outputs are memoized per instance, so two calls with equal
input give equal output within a run.
"""

from __future__ import annotations

import hashlib
import json
import shlex
import subprocess
import threading
from pathlib import Path

import numpy as np

ENTITY_NONE = "none"
ENTITY_LABELS = ("PER", "LOC", "ORG", "MISC", ENTITY_NONE)
POS_TAGS = ("adj", "adv", "conj", "misc", "noun", "noun_prop", "part", "prep", "pron", "verb")
POS_FALLBACK = "misc"


class ProviderUnavailable(Exception):
    """A provider cannot serve requests (missing process, dead pipe, ...)."""


def load_tsv_table(path: str | Path) -> dict[str, str]:
    """Load a two-column UTF-8 TSV into an input -> output mapping."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) < 2:
                continue
            table[cells[0]] = cells[1]
    return table


class _Memoized:
    """Per-run memoization wrapper around a provider callable."""

    def __init__(self, fn):
        self._fn = fn
        self._cache: dict = {}

    def __call__(self, *key):
        if key not in self._cache:
            self._cache[key] = self._fn(*key)
        return self._cache[key]


# --- builtin providers -----------------------------------------------------

# Rough Latin-to-Arabic mapping for the fallback transliterator. Digraphs
# first, then single letters; unknown characters are dropped.
_LATIN_AR_DIGRAPHS = {
    "th": "ث", "kh": "خ", "dh": "ذ", "sh": "ش", "gh": "غ", "ph": "ف",
    "ch": "تش", "oo": "و", "ee": "ي",
}
_LATIN_AR_SINGLES = {
    "a": "ا", "b": "ب", "c": "ك", "d": "د", "e": "ي", "f": "ف", "g": "غ",
    "h": "ه", "i": "ي", "j": "ج", "k": "ك", "l": "ل", "m": "م", "n": "ن",
    "o": "و", "p": "ب", "q": "ق", "r": "ر", "s": "س", "t": "ت", "u": "و",
    "v": "ف", "w": "و", "x": "كس", "y": "ي", "z": "ز",
}
_VOWELS = "aeiou"


def rule_transliterate(text: str) -> str:
    """Map Latin text to an approximate Arabic rendering, word by word."""
    words = []
    for word in text.casefold().split():
        out = []
        i = 0
        if word and word[0] in _VOWELS:
            # word-initial vowels get a leading alef carrier
            out.append("ا")
            if word[0] in "ei":
                out.append("ي")
            elif word[0] in "ou":
                out.append("و")
            i = 1
        while i < len(word):
            pair = word[i:i + 2]
            if pair in _LATIN_AR_DIGRAPHS:
                out.append(_LATIN_AR_DIGRAPHS[pair])
                i += 2
                continue
            out.append(_LATIN_AR_SINGLES.get(word[i], ""))
            i += 1
        words.append("".join(out))
    return " ".join(w for w in words if w)


class HashingEmbedder:
    """Character n-gram hashing embedder. Deterministic, NOT semantic."""

    def __init__(self, dim: int = 64, ngram_sizes: tuple[int, ...] = (1, 2, 3)):
        self.dim = dim
        self.ngram_sizes = ngram_sizes

    def __call__(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        t = " ".join(text.casefold().split())
        for n in self.ngram_sizes:
            for i in range(max(0, len(t) - n + 1)):
                gram = t[i:i + n]
                h = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
                v = int.from_bytes(h, "big")
                vec[v % self.dim] += 1.0 if (v >> 63) & 1 == 0 else -1.0
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec


class TableTranslator:
    def __init__(self, table: dict[str, str]):
        self.table = table

    def __call__(self, text: str) -> str:
        return self.table.get(text, self.table.get(text.strip(), ""))


class TableTransliterator:
    """TSV-backed transliterator falling back to the builtin rules."""

    def __init__(self, table: dict[str, str]):
        self.table = table

    def __call__(self, text: str) -> str:
        hit = self.table.get(text, self.table.get(text.strip()))
        return hit if hit is not None else rule_transliterate(text)


class TableNer:
    def __init__(self, table: dict[str, str]):
        self.table = table

    def __call__(self, text: str, context: str | None = None) -> str:
        label = self.table.get(text, self.table.get(text.strip(), ENTITY_NONE))
        return label if label in ENTITY_LABELS else ENTITY_NONE


class TablePos:
    def __init__(self, table: dict[str, str]):
        self.table = table

    def __call__(self, word: str, context: str | None = None) -> str:
        tag = self.table.get(word, POS_FALLBACK)
        return tag if tag in POS_TAGS else POS_FALLBACK


class ProcessProvider:
    """Provider backed by an external process.

    Protocol: one JSON object per line on stdin, one per line on stdout.
    Request: {"op": "embed"|"translate"|"transliterate"|"ner"|"pos",
    "text": ..., "context": ...}; response: {"ok": true, "value": ...}.
    """

    def __init__(self, cmd: str | list[str], op: str):
        self.op = op
        self._lock = threading.Lock()  # serialize pipe access across workers
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1,
            )
        except OSError as e:
            raise ProviderUnavailable(f"cannot start provider process {argv}: {e}") from e

    def __call__(self, text: str, context: str | None = None):
        req = {"op": self.op, "text": text}
        if context is not None:
            req["context"] = context
        try:
            with self._lock:
                self.proc.stdin.write(json.dumps(req, ensure_ascii=False) + "\n")
                self.proc.stdin.flush()
                line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as e:
            raise ProviderUnavailable(f"provider process pipe failed: {e}") from e
        if not line:
            raise ProviderUnavailable("provider process closed its stdout")
        resp = json.loads(line)
        if not resp.get("ok"):
            raise ProviderUnavailable(f"provider returned error: {resp}")
        value = resp["value"]
        if self.op == "embed":
            vec = np.asarray(value, dtype=np.float64)
            norm = np.linalg.norm(vec)
            return vec / norm if norm > 0 else vec
        return value

    def close(self):
        if self.proc.poll() is None:
            self.proc.stdin.close()
            self.proc.terminate()
            self.proc.wait(timeout=5)


class ProviderSet:
    """The five feature providers, each memoized for the run."""

    def __init__(self, embedder=None, translator=None, transliterator=None,
                 ner=None, pos_tagger=None):
        self.embedder = _Memoized(embedder) if embedder else None
        self.translator = _Memoized(translator) if translator else None
        self.transliterator = _Memoized(transliterator) if transliterator else None
        self.ner = _Memoized(ner) if ner else None
        self.pos_tagger = _Memoized(pos_tagger) if pos_tagger else None

    def embed(self, text: str) -> np.ndarray:
        if self.embedder is None:
            raise ProviderUnavailable("no embedder configured")
        return self.embedder(text)

    def translate(self, text: str) -> str:
        if self.translator is None:
            raise ProviderUnavailable("no translator configured")
        return self.translator(text)

    def transliterate(self, text: str) -> str:
        if self.transliterator is None:
            raise ProviderUnavailable("no transliterator configured")
        return self.transliterator(text)

    def entity(self, text: str, context: str | None = None) -> str:
        if self.ner is None:
            raise ProviderUnavailable("no NER provider configured")
        return self.ner(text, context)

    def pos(self, word: str, context: str | None = None) -> str:
        if self.pos_tagger is None:
            raise ProviderUnavailable("no POS provider configured")
        return self.pos_tagger(word, context)


def builtin_provider_set() -> ProviderSet:
    """All-builtin providers: runnable offline, clearly non-semantic."""
    return ProviderSet(
        embedder=HashingEmbedder(),
        translator=TableTranslator({}),
        transliterator=TableTransliterator({}),
        ner=TableNer({}),
        pos_tagger=TablePos({}),
    )


def provider_from_source(kind: str, source: str, base_dir: str | Path = "."):
    """Build one provider from a config source string.

    Sources: "builtin", "table:PATH" (two-column TSV), "process:CMD".
    """
    base = Path(base_dir)
    if source == "builtin":
        return {
            "embedder": HashingEmbedder(),
            "translator": TableTranslator({}),
            "transliterator": TableTransliterator({}),
            "ner": TableNer({}),
            "pos": TablePos({}),
        }[kind]
    if source.startswith("table:"):
        path = base / source[len("table:"):]
        table = load_tsv_table(path)
        return {
            "translator": TableTranslator(table),
            "transliterator": TableTransliterator(table),
            "ner": TableNer(table),
            "pos": TablePos(table),
        }[kind]
    if source.startswith("process:"):
        op = {"embedder": "embed", "translator": "translate",
              "transliterator": "transliterate", "ner": "ner", "pos": "pos"}[kind]
        return ProcessProvider(source[len("process:"):], op)
    raise ValueError(f"unknown provider source {source!r} for {kind}")


def provider_set_from_config(cfg: dict, base_dir: str | Path = ".") -> ProviderSet:
    """Build the full set from {"embedder": SRC, "translator": SRC, ...}."""
    def get(kind):
        return provider_from_source(kind, cfg.get(kind, "builtin"), base_dir)

    return ProviderSet(
        embedder=get("embedder"),
        translator=get("translator"),
        transliterator=get("transliterator"),
        ner=get("ner"),
        pos_tagger=get("pos"),
    )
