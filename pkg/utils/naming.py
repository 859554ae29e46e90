"""Name lookup with fuzzy "did you mean" suggestions"""

from typing import Iterable, Optional

from rapidfuzz import fuzz, process

from services.errors import ConfigError

SUGGESTION_MIN_SCORE = 60


def suggest_name(name: str, choices: Iterable[str]) -> Optional[str]:
    match = process.extractOne(name, list(choices), scorer=fuzz.ratio)
    if match and match[1] >= SUGGESTION_MIN_SCORE:
        return match[0]
    return None


def require_name(name: str, choices: Iterable[str], what: str) -> str:
    """Return name if it is a known choice, else raise ConfigError with a suggestion"""
    choices = list(choices)
    if name in choices:
        return name
    suggestion = suggest_name(name, choices)
    hint = f" - did you mean '{suggestion}'?" if suggestion else ""
    raise ConfigError(f"unknown {what} '{name}'{hint} (choices: {', '.join(choices)})")
