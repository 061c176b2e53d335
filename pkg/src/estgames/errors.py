"""Domain error hierarchy.

Every error carries a stable ``code`` string so the HTTP layer and the CLI
can surface machine-readable failures without string-matching messages.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all domain errors."""

    code = "DOMAIN_ERROR"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)


class InvalidConfig(DomainError):
    """Configuration violates an invariant."""

    code = "INVALID_CONFIG"


class InvalidInput(DomainError):
    """Input value rejected (empty text, malformed field)."""

    code = "INVALID_INPUT"


class EmptyEstimateSet(DomainError):
    """An estimate multiset was empty."""

    code = "EMPTY_ESTIMATE_SET"
    http_status = 409


class EmptyChoiceList(DomainError):
    """A choice list was empty."""

    code = "EMPTY_CHOICE_LIST"


class NonPositiveActual(DomainError):
    """Actual effort must be strictly positive."""

    code = "NON_POSITIVE_ACTUAL"


class NonPositiveEffort(NonPositiveActual):
    """Sampled true effort must be strictly positive."""

    code = "NON_POSITIVE_EFFORT"


class ValueNotOnScale(DomainError):
    """Estimate value is not a member of the session scale."""

    code = "VALUE_NOT_ON_SCALE"


class UnknownFormat(DomainError):
    """Requested export format is not supported."""

    code = "UNKNOWN_FORMAT"


# --- equilibrium ---------------------------------------------------------


class PlayerCountTooSmall(DomainError):
    """Game construction requires more players."""

    code = "PLAYER_COUNT_TOO_SMALL"


class PlayerOutOfRange(DomainError):
    """Player index exceeds the game's player count."""

    code = "PLAYER_OUT_OF_RANGE"


class WrongShape(DomainError):
    """Operation requires a different game shape (e.g. 2x2)."""

    code = "WRONG_SHAPE"


class GameTooLarge(DomainError):
    """Profile space exceeds the enumeration cap."""

    code = "GAME_TOO_LARGE"


class MalformedGame(DomainError):
    """Game description is incomplete or inconsistent."""

    code = "MALFORMED_GAME"


# --- session engine ------------------------------------------------------


class SessionStateError(DomainError):
    """Command not allowed in the current session state."""

    code = "SESSION_STATE"
    http_status = 409


class UnknownSession(DomainError):
    """No session with that id."""

    code = "UNKNOWN_SESSION"
    http_status = 404


class UnknownStory(DomainError):
    """No story with that id."""

    code = "UNKNOWN_STORY"
    http_status = 404


class UnknownParticipant(DomainError):
    """No such participant in this session."""

    code = "UNKNOWN_PARTICIPANT"
    http_status = 404


class DuplicateParticipant(DomainError):
    """Display name already taken in this session."""

    code = "DUPLICATE_PARTICIPANT"
    http_status = 409


class AlreadySealed(SessionStateError):
    """Participant already has a sealed estimate for this story."""

    code = "ALREADY_SEALED"


class StoryNotEstimating(SessionStateError):
    """Story is not open for estimation."""

    code = "STORY_NOT_ESTIMATING"


class NotAllSubmitted(SessionStateError):
    """Reveal requires every joined participant to have submitted."""

    code = "NOT_ALL_SUBMITTED"


class StoryNotRevealed(SessionStateError):
    """Story has not been revealed."""

    code = "STORY_NOT_REVEALED"


class StoryNotInProgress(SessionStateError):
    """Story is not in progress."""

    code = "STORY_NOT_IN_PROGRESS"


class NoOriginalEstimate(SessionStateError):
    """Participant never submitted an estimate for this story."""

    code = "NO_ORIGINAL_ESTIMATE"


class StoryNotDone(SessionStateError):
    """Story is not done yet."""

    code = "STORY_NOT_DONE"


class AlreadyScored(SessionStateError):
    """Story was already scored."""

    code = "ALREADY_SCORED"


class GapInSequence(DomainError):
    """Event log sequence numbers are not contiguous from 1."""

    code = "GAP_IN_SEQUENCE"


class UnknownEventKind(DomainError):
    """Event log contains an unrecognized event kind."""

    code = "UNKNOWN_EVENT_KIND"
