"""Arabic-aware normalization, tokenization, and script classification.

Everything downstream (occurrence extraction, candidate surfaces, similarity
features, termbase grouping) goes through this module, so the rules here are
deliberately small and deterministic:

- normalization profiles are flat flag sets, idempotent by construction;
- tokenization is offset-preserving (the source string can be reconstructed
  from token spans);
- script classification looks at letters only.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

# Script classes for tokens.
ARABIC = "arabic"
LATIN = "latin"
DIGIT = "digit"
PUNCT = "punct"
MIXED = "mixed"

# Arabic diacritic combining marks: Quranic annotation signs (0610-061A),
# tashkeel (064B-065F) and the superscript alef (0670).
_DIACRITICS_RE = re.compile(r"[ؐ-ًؚ-ٰٟ]")
_TATWEEL = "ـ"
_ALEF_VARIANTS_RE = re.compile(r"[آأإ]")  # آ أ إ -> ا
_TEH_MARBUTA = "ة"  # ة -> ه
_ALEF_MAQSURA = "ى"  # ى -> ي

_APOSTROPHES = {"'", "’"}

_WS_RE = re.compile(r"\s+")
_FOREIGN_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class NormalizationProfile:
    """Flat flag set controlling normalize_arabic."""

    remove_tatweel: bool = True
    remove_diacritics: bool = True
    unify_alef: bool = True
    teh_marbuta_to_heh: bool = False
    alef_maqsura_to_yeh: bool = False

    def to_dict(self) -> dict:
        return {
            "remove_tatweel": self.remove_tatweel,
            "remove_diacritics": self.remove_diacritics,
            "unify_alef": self.unify_alef,
            "teh_marbuta_to_heh": self.teh_marbuta_to_heh,
            "alef_maqsura_to_yeh": self.alef_maqsura_to_yeh,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationProfile":
        return cls(**{k: bool(v) for k, v in d.items()})


# Full normalization: used where orthographic variants must collapse.
DEFAULT_PROFILE = NormalizationProfile()

# Matching profile: used for stored candidate text and similarity inputs.
# Alef unification is OFF so hamza-seated vs bare alef stays a 1-edit
# difference in the lexical features.
MATCHING_PROFILE = NormalizationProfile(unify_alef=False)

# Grouping profile: matching plus alef unification, used when clustering
# Arabic surfaces (termbase entries, glossary lookups, consistency checks).
GROUPING_PROFILE = NormalizationProfile(unify_alef=True)


def normalize_arabic(text: str, profile: NormalizationProfile = DEFAULT_PROFILE) -> str:
    """Normalize Arabic characters per profile; non-Arabic text passes through."""
    if profile.remove_tatweel:
        text = text.replace(_TATWEEL, "")
    if profile.remove_diacritics:
        text = _DIACRITICS_RE.sub("", text)
    if profile.unify_alef:
        text = _ALEF_VARIANTS_RE.sub("ا", text)
    if profile.teh_marbuta_to_heh:
        text = text.replace(_TEH_MARBUTA, "ه")
    if profile.alef_maqsura_to_yeh:
        text = text.replace(_ALEF_MAQSURA, "ي")
    return text


def normalize_foreign(text: str) -> str:
    """Case-fold and whitespace-collapse a foreign term (unique-term keying)."""
    return _WS_RE.sub(" ", text.strip()).casefold()


def normalize_foreign_loose(text: str) -> str:
    """normalize_foreign plus punctuation stripping (glossary matching)."""
    return _WS_RE.sub(" ", _FOREIGN_PUNCT_RE.sub("", text).strip()).casefold()


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int
    script: str

    def is_word(self) -> bool:
        return self.script != PUNCT


def _is_arabic_letter(c: str) -> bool:
    o = ord(c)
    return 0x0600 <= o <= 0x06FF or 0x0750 <= o <= 0x077F or 0xFB50 <= o <= 0xFEFF


def _is_latin_letter(c: str) -> bool:
    o = ord(c)
    if 0x41 <= o <= 0x5A or 0x61 <= o <= 0x7A:
        return True
    # Latin-1 letters, excluding multiplication/division signs
    return 0xC0 <= o <= 0xFF and o not in (0xD7, 0xF7)


def _is_punct_char(c: str) -> bool:
    return unicodedata.category(c).startswith("P")


def classify_script(text: str) -> str:
    """Classify a token by its letters; letter-free tokens by char class."""
    letters = [c for c in text if c.isalpha()]
    if not letters:
        if text and all(c.isdigit() for c in text):
            return DIGIT
        if text and all(_is_punct_char(c) for c in text):
            return PUNCT
        return MIXED
    if all(_is_arabic_letter(c) for c in letters):
        return ARABIC
    if all(_is_latin_letter(c) for c in letters):
        return LATIN
    return MIXED


def _apostrophe_is_internal(text: str, i: int) -> bool:
    # An apostrophe stays inside a word only when flanked by letters.
    return 0 < i < len(text) - 1 and text[i - 1].isalpha() and text[i + 1].isalpha()


def tokenize(text: str) -> list[Token]:
    """Split into word and punctuation tokens with source offsets.

    Whitespace separates tokens; every punctuation character becomes its own
    PUNCT token, except apostrophes flanked by letters, which stay inside the
    word token (so "l'ethnocentrisme" is one token).
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if _is_punct_char(c) and not (c in _APOSTROPHES and _apostrophe_is_internal(text, i)):
            tokens.append(Token(c, i, i + 1, PUNCT))
            i += 1
            continue
        start = i
        while i < n:
            c = text[i]
            if c.isspace():
                break
            if _is_punct_char(c) and not (c in _APOSTROPHES and _apostrophe_is_internal(text, i)):
                break
            i += 1
        word = text[start:i]
        tokens.append(Token(word, start, i, classify_script(word)))
    return tokens
