"""Per-user leave-last-session splits."""

import logging

from synth import Dataset

from .data_models import SplitSpec, UserSplit

logger = logging.getLogger(__name__)


def make_splits(dataset: Dataset, min_sessions: int = 3, min_basket: int = 2) -> SplitSpec:
    """Last session is test, second to last is validation, the rest trains.

    Users with fewer than ``min_sessions`` sessions are excluded entirely.
    """
    users: dict[int, UserSplit] = {}
    excluded: list[int] = []
    for user, sessions in sorted(dataset.by_user().items()):
        if len(sessions) < min_sessions:
            excluded.append(user)
            continue
        users[user] = UserSplit(
            user=user, train=sessions[:-2], validation=sessions[-2], test=sessions[-1]
        )
    if excluded:
        logger.info("Excluded %d users with fewer than %d sessions", len(excluded), min_sessions)
    logger.debug("Split %d users", len(users))
    return SplitSpec(users=users, excluded=excluded, min_basket=min_basket)
