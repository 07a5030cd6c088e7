from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Callable

import pytest

SRC_PATH = Path(__file__).resolve().parents[1] / "src"
if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))

from curio import config as curio_config  # noqa: E402
from curio.crypto import derive_signing_key  # noqa: E402
from curio.engine.schemas import Scenario  # noqa: E402
from curio.models import (  # noqa: E402
    BehaviorKind,
    ClearanceLevel,
    InformationSet,
    Player,
    TrustPolicy,
)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch) -> Any:
    """Keep CURIO_* variables from the caller's shell out of every test."""

    for name in ("CURIO_SEED", "CURIO_LOG_LEVEL", "CURIO_LOG_JSON", "CURIO_VERIFY_WORKERS"):
        monkeypatch.delenv(name, raising=False)
    curio_config.get_settings.cache_clear()
    yield monkeypatch
    curio_config.get_settings.cache_clear()
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        if getattr(handler, "_curio", False):
            root_logger.removeHandler(handler)


@pytest.fixture
def make_player() -> Callable[..., Player]:
    def factory(
        pid: int,
        clearance: ClearanceLevel = ClearanceLevel.SECRET,
        behavior: BehaviorKind | None = None,
        trust: TrustPolicy | None = None,
        seed: int = 7,
    ) -> Player:
        return Player(
            id=pid,
            clearance=clearance,
            behavior=behavior or BehaviorKind(),
            trust=trust or TrustPolicy(),
            key=derive_signing_key(seed, pid),
            info=InformationSet(owner=pid),
        )

    return factory


def desk_scenario_data(**overrides: Any) -> dict[str, Any]:
    """Six players across three levels; player 5 is a curious secret-level player."""

    trusting = {"grant_probability": 1.0, "verify_need_to_know": False}
    data: dict[str, Any] = {
        "players": [
            {"clearance": "confidential", "trust": trusting},
            {"clearance": "confidential", "trust": trusting},
            {"clearance": "secret", "trust": trusting},
            {"clearance": "secret", "trust": trusting},
            {"clearance": "top_secret", "trust": trusting},
            {"clearance": "secret", "behavior": {"tag": "curious_overt"}, "trust": trusting},
        ],
        "rounds": 6,
        "check_every": 5,
        "seed": 11,
        "assumed_m": 1,
        "authoring_schedule": [
            {"round": 0, "player": 2, "level": "secret", "need_to_know": [2, 3]},
            {"round": 0, "player": 0, "level": "confidential", "need_to_know": [0, 1, 2]},
        ],
    }
    data.update(overrides)
    return data


@pytest.fixture
def desk_data() -> Callable[..., dict[str, Any]]:
    return desk_scenario_data


@pytest.fixture
def desk_scenario() -> Callable[..., Scenario]:
    def factory(**overrides: Any) -> Scenario:
        return Scenario.model_validate(desk_scenario_data(**overrides))

    return factory
