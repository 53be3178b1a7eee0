"""Shared tokenization and the embedded stop-word list.

Both content scanning and file-name feature extraction tokenize the same
way: lowercase, split on non-alphanumeric runs, drop stop words. File-name
cleaning additionally deletes digit characters before splitting.
"""

from __future__ import annotations

import re

# Versioned so that serialized artifacts (feature specs, scan results) can
# record which list produced them.
STOP_WORDS_VERSION = 1

# Fixed English stop-word list. Single-letter words ("a", "i") are
# deliberately absent: single letters in file names often carry meaning
# (drive letters, section labels) and are kept as tokens.
STOP_WORDS = frozenset("""
about above after again against all am an and any are aren arent as at be
because been before being below between both but by can cannot could couldnt
did didn didnt do does doesn doesnt doing don dont down during each few for
from further had hadn hadnt has hasn hasnt have haven havent having he hed
hell her here hers herself hes him himself his how hows id if ill im in into
is isn isnt it its itself ive just ll me might mightnt more most mustn
mustnt my myself needn neednt no nor not now of off on once only or other
ought our ours ourselves out over own re same shan shant she shed shell shes
should shouldn shouldnt shouldve so some such than that thatll thats the
their theirs them themselves then there theres these they theyd theyll
theyre theyve this those through to too under until up ve very was wasn
wasnt we wed well were weren werent weve what whats when whens where wheres
which while who whom whos why whys will with won wont would wouldn wouldnt
you youd youll youre yours yourself yourselves youve
""".split())

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")
_ALPHA_SPLIT = re.compile(r"[^a-z]+")
_DIGITS = re.compile(r"[0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs. No stop-word filtering."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def content_tokens(text: str) -> list[str]:
    """Token stream for content scanning: tokenize() minus stop words."""
    return [t for t in tokenize(text) if t not in STOP_WORDS]


def name_tokens(stem: str) -> list[str]:
    """Cleaned tokens of a file-name stem.

    Digit characters are deleted (not treated as separators), punctuation
    splits, stop words are dropped. "Report 2015!" -> ["report"].
    """
    cleaned = _DIGITS.sub("", stem.lower())
    return [t for t in _ALPHA_SPLIT.split(cleaned) if t and t not in STOP_WORDS]
