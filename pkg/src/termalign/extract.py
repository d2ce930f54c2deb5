"""Locate parenthetical foreign terms and capture their Arabic left-context.

An occurrence is one balanced parenthetical whose content is predominantly
Latin-script, together with the run of Arabic words to its left (nearest
word first), bounded by sentence punctuation, another parenthetical, the
paragraph start, or the configured window.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .textnorm import ARABIC, PUNCT, Token, normalize_foreign, tokenize

log = logging.getLogger(__name__)

SENTENCE_PUNCT = {".", "؟", "!", "؛", ":"}
DASHES = {"-", "–", "—"}  # kept as interior tokens, never counted as words

_PARAGRAPH_RE = re.compile(r"\n\s*\n")


@dataclass(frozen=True)
class Document:
    doc_id: str
    book_id: str
    text: str
    source_path: str = ""


@dataclass
class ExtractConfig:
    max_window: int = 12


@dataclass(frozen=True)
class ParenIssue:
    """One unbalanced parenthesis, reported without stopping extraction."""
    doc_id: str
    position: int
    kind: str  # "unbalanced-open" | "unbalanced-close"


@dataclass
class Occurrence:
    occurrence_id: str
    doc_id: str
    foreign_term: str
    foreign_char_span: tuple[int, int]
    context_text: str
    preceding_words: list[Token]
    book_id: str = ""
    context_char_start: int = 0  # offset of context_text within the document

    @property
    def n_words(self) -> int:
        return sum(1 for t in self.preceding_words if t.script != PUNCT)

    def to_dict(self) -> dict:
        return {
            "occurrence_id": self.occurrence_id,
            "doc_id": self.doc_id,
            "book_id": self.book_id,
            "foreign_term": self.foreign_term,
            "foreign_char_span": list(self.foreign_char_span),
            "context_text": self.context_text,
            "context_char_start": self.context_char_start,
            "preceding_words": [
                {"text": t.text, "char_start": t.char_start,
                 "char_end": t.char_end, "script": t.script}
                for t in self.preceding_words
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Occurrence":
        return cls(
            occurrence_id=d["occurrence_id"],
            doc_id=d["doc_id"],
            book_id=d.get("book_id", ""),
            foreign_term=d["foreign_term"],
            foreign_char_span=tuple(d["foreign_char_span"]),
            context_text=d["context_text"],
            context_char_start=d.get("context_char_start", 0),
            preceding_words=[
                Token(w["text"], w["char_start"], w["char_end"], w["script"])
                for w in d["preceding_words"]
            ],
        )


def _paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Paragraphs are runs of text between blank lines."""
    spans = []
    pos = 0
    for m in _PARAGRAPH_RE.finditer(text):
        if m.start() > pos:
            spans.append((pos, m.start()))
        pos = m.end()
    if pos < len(text):
        spans.append((pos, len(text)))
    return spans


def _balanced_pairs(text: str, offset: int, doc_id: str,
                    issues: list[ParenIssue] | None) -> list[tuple[int, int]]:
    """All balanced ( ) pairs in text, recording unbalanced defects."""
    stack: list[int] = []
    pairs: list[tuple[int, int]] = []
    for i, c in enumerate(text):
        if c == "(":
            stack.append(i)
        elif c == ")":
            if not stack:
                if issues is not None:
                    issues.append(ParenIssue(doc_id, offset + i, "unbalanced-close"))
                continue
            pairs.append((stack.pop(), i))
    if issues is not None:
        for i in stack:
            issues.append(ParenIssue(doc_id, offset + i, "unbalanced-open"))
    return pairs


def _innermost(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    inner = [
        (o, c) for o, c in pairs
        if not any(o < o2 and c2 < c for o2, c2 in pairs if (o2, c2) != (o, c))
    ]
    inner.sort()
    return inner


def _letter_counts(text: str) -> tuple[int, int, int]:
    from .textnorm import _is_arabic_letter, _is_latin_letter  # module-private on purpose

    total = latin = arabic = 0
    for c in text:
        if c.isalpha():
            total += 1
            if _is_latin_letter(c):
                latin += 1
            elif _is_arabic_letter(c):
                arabic += 1
    return total, latin, arabic


def _collect_preceding(tokens: list[Token], open_pos: int, max_window: int) -> list[Token]:
    """Walk left from the parenthesis collecting Arabic words plus interior dashes."""
    words: list[Token] = []
    pending: list[Token] = []
    count = 0
    before = [t for t in tokens if t.char_end <= open_pos]
    for tok in reversed(before):
        if tok.script == PUNCT:
            if tok.text in DASHES and count > 0:
                pending.append(tok)
                continue
            break  # sentence punctuation, parentheses, quotes: stop
        if tok.script != ARABIC:
            break
        if count >= max_window:
            break
        words.extend(pending)
        pending.clear()
        words.append(tok)
        count += 1
    return words


def extract_occurrences(doc: Document, cfg: ExtractConfig | None = None,
                        issues: list[ParenIssue] | None = None) -> list[Occurrence]:
    """One Occurrence per innermost balanced parenthetical with Latin content.

    The parenthetical qualifies when >50% of its letter characters are Latin
    and none are Arabic. Occurrences with no Arabic left-context are dropped
    (count logged).
    """
    cfg = cfg or ExtractConfig()
    occurrences: list[Occurrence] = []
    dropped = 0
    for p_start, p_end in _paragraph_spans(doc.text):
        para = doc.text[p_start:p_end]
        rel_tokens = tokenize(para)
        tokens = [Token(t.text, t.char_start + p_start, t.char_end + p_start, t.script)
                  for t in rel_tokens]
        pairs = _balanced_pairs(para, p_start, doc.doc_id, issues)
        for o_rel, c_rel in _innermost(pairs):
            inner = para[o_rel + 1:c_rel]
            total, latin, arabic = _letter_counts(inner)
            if total == 0 or arabic > 0 or latin * 2 <= total:
                continue
            o_abs, c_abs = o_rel + p_start, c_rel + p_start
            preceding = _collect_preceding(tokens, o_abs, cfg.max_window)
            if not any(t.script == ARABIC for t in preceding):
                dropped += 1
                continue
            occurrences.append(Occurrence(
                occurrence_id=f"{doc.doc_id}@{o_abs}",
                doc_id=doc.doc_id,
                book_id=doc.book_id,
                foreign_term=inner,
                foreign_char_span=(o_abs, c_abs + 1),
                context_text=para,
                context_char_start=p_start,
                preceding_words=preceding,
            ))
    if dropped:
        log.info("doc %s: dropped %d parentheticals without Arabic left-context",
                 doc.doc_id, dropped)
    return occurrences


@dataclass
class StatsReport:
    books: int = 0
    unique_foreign_terms: int = 0
    occurrences: int = 0
    candidates: int = 0
    avg_candidates_per_occurrence: float = 0.0
    book_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "books": self.books,
            "unique_foreign_terms": self.unique_foreign_terms,
            "occurrences": self.occurrences,
            "candidates": self.candidates,
            "avg_candidates_per_occurrence": round(self.avg_candidates_per_occurrence, 2),
        }

    def render(self) -> str:
        d = self.to_dict()
        width = max(len(k) for k in d)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in d.items())


def corpus_stats(occurrences: list[Occurrence], candidates: list) -> StatsReport:
    """Corpus-level counts plus the average candidates per occurrence."""
    books = sorted({o.book_id for o in occurrences if o.book_id})
    terms = {normalize_foreign(o.foreign_term) for o in occurrences}
    n_occ = len(occurrences)
    n_cand = len(candidates)
    return StatsReport(
        books=len(books),
        unique_foreign_terms=len(terms),
        occurrences=n_occ,
        candidates=n_cand,
        avg_candidates_per_occurrence=(n_cand / n_occ) if n_occ else 0.0,
        book_ids=books,
    )


def write_occurrences_jsonl(occurrences: list[Occurrence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for occ in occurrences:
            fh.write(json.dumps(occ.to_dict(), ensure_ascii=False) + "\n")


def read_occurrences_jsonl(path: str | Path) -> list[Occurrence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Occurrence.from_dict(json.loads(line)))
    return out


def load_documents(input_dir: str | Path) -> list[Document]:
    """Load UTF-8 .txt files; book_id is the file stem (or the directory
    name when books are directories of files)."""
    root = Path(input_dir)
    docs = []
    for path in sorted(root.rglob("*.txt")):
        rel = path.relative_to(root)
        book_id = rel.parts[0] if len(rel.parts) > 1 else path.stem
        doc_id = str(rel.with_suffix("")).replace("\\", "/")
        docs.append(Document(
            doc_id=doc_id,
            book_id=book_id if len(rel.parts) > 1 else path.stem,
            text=path.read_text(encoding="utf-8"),
            source_path=str(path),
        ))
    return docs
