from __future__ import annotations

import pytest

from curio.engine import (
    CheckRecord,
    GroundTruth,
    InvalidScenario,
    Scenario,
    Simulation,
    check_conservation,
    metrics_from,
    replay_report,
    run,
)
from curio.engine.topology import default_topology, is_connected, normalize
from curio.models import BehaviorTag, ClearanceLevel
from curio.protocols import Evidence, EvidenceKind, Outcome, Verdict
from curio.storage import report_lines

C, S, T = ClearanceLevel.CONFIDENTIAL, ClearanceLevel.SECRET, ClearanceLevel.TOP_SECRET


def _with_behavior(data: dict, pid: int, behavior: dict) -> dict:
    players = [dict(player) for player in data["players"]]
    players[pid]["behavior"] = behavior
    return {**data, "players": players}


def test_default_topology_links_levels_through_liaisons() -> None:
    adjacency = default_topology([C, C, S, S, T, S])

    assert adjacency[0] == (1, 2)
    assert adjacency[2] == (0, 3, 4, 5)
    assert adjacency[4] == (2,)
    assert is_connected(adjacency)


def test_explicit_topology_is_symmetrized() -> None:
    adjacency = normalize({0: [1], 2: [1, 2]}, 4)

    assert adjacency == {0: (1,), 1: (0, 2), 2: (1,), 3: ()}
    assert not is_connected(adjacency)


def test_disconnected_topology_is_invalid(desk_scenario) -> None:
    scenario = desk_scenario(topology={0: [1], 2: [3, 4, 5]})

    with pytest.raises(InvalidScenario) as excinfo:
        Simulation(scenario)
    assert [issue.field for issue in excinfo.value.issues] == ["topology"]


def test_unknown_partner_is_invalid(desk_data) -> None:
    data = _with_behavior(desk_data(), 5, {"tag": "traitor_colluding", "params": {"partners": [9]}})

    with pytest.raises(InvalidScenario) as excinfo:
        run(Scenario.model_validate(data))
    assert excinfo.value.issues[0].field == "players.5.behavior.params.partners"


def test_desk_run_detects_curious_player(desk_scenario) -> None:
    report = run(desk_scenario())

    assert [check.round for check in report.checks] == [4, 5]
    assert report.ground_truth is not None
    assert report.ground_truth.first_acquisition == {5: 2}
    first = report.checks[0]
    assert [v.player for v in first.ratified if v.curious] == [5]
    (evidence,) = first.ratified[5].evidence
    assert evidence.kind is EvidenceKind.NEED_TO_KNOW_VIOLATION
    assert evidence.sig is not None and evidence.sig.doc_id == "2:0"

    metrics = report.metrics
    assert metrics is not None
    assert (metrics.true_positives, metrics.false_positives, metrics.false_negatives) == (1, 0, 0)
    assert metrics.rounds_to_detection == {5: 2}
    assert metrics.out_of_ntk_held == 1
    assert metrics.ba_messages == 2 * (6 + 6 * 5)


def test_curious_player_stores_observed_envelopes(desk_scenario) -> None:
    report = run(desk_scenario())

    truth = {record.player: record for record in report.checks[-1].truth}
    assert truth[5].retained_envelopes >= 2
    assert truth[0].retained_envelopes == 0


def test_concealing_player_is_caught_by_the_registry(desk_data) -> None:
    data = _with_behavior(desk_data(), 5, {"tag": "curious_concealing"})

    report = run(Scenario.model_validate(data))

    first = report.checks[0]
    assert first.disclosures[5].transferred_sigs == frozenset()
    kinds = {evidence.kind for evidence in first.ratified[5].evidence}
    assert kinds == {EvidenceKind.UNDISCLOSED_HOLDING, EvidenceKind.NEED_TO_KNOW_VIOLATION}
    assert report.metrics is not None and report.metrics.false_positives == 0


def test_brute_force_oracle_agrees_with_need_to_know_evidence(desk_scenario) -> None:
    report = run(desk_scenario())

    for check in report.checks:
        expected = {
            (truth.player, holding.doc_id)
            for truth in check.truth
            for holding in truth.transferred
            if not holding.in_need_to_know
        }
        found = {
            (verdict.player, evidence.sig.doc_id)
            for verdict in check.verdicts
            for evidence in verdict.evidence
            if evidence.kind is EvidenceKind.NEED_TO_KNOW_VIOLATION and evidence.sig is not None
        }
        assert found == expected


def test_all_loyal_population_is_never_flagged(desk_data) -> None:
    data = _with_behavior(desk_data(rounds=10), 5, {"tag": "loyal"})

    report = run(Scenario.model_validate(data))

    assert len(report.checks) == 2
    assert all(verdict.outcome is Outcome.LOYAL for check in report.checks for verdict in check.ratified)
    assert report.metrics is not None and report.metrics.false_positives == 0


def test_cautious_holders_stop_the_curious_player(desk_data) -> None:
    data = desk_data()
    players = [
        {**player, "trust": {"grant_probability": 1.0, "verify_need_to_know": True}} for player in data["players"]
    ]

    report = run(Scenario.model_validate({**data, "players": players}))

    assert report.metrics is not None
    assert report.metrics.denied_requests >= 1
    assert report.metrics.true_positives == 0
    assert report.metrics.false_negatives == 1
    assert report.ground_truth is not None and report.ground_truth.first_acquisition == {}


def test_identical_runs_serialize_identically(desk_scenario) -> None:
    first = list(report_lines(run(desk_scenario())))
    second = list(report_lines(run(desk_scenario())))

    assert first == second


def test_blind_run_yields_identical_verdicts(desk_scenario) -> None:
    plain = run(desk_scenario())
    blind = run(desk_scenario(), redact_inter_clearance=True)

    assert blind.header.redacted
    assert [check.verdicts for check in plain.checks] == [check.verdicts for check in blind.checks]
    assert [check.ratified for check in plain.checks] == [check.ratified for check in blind.checks]


def test_blind_run_zeroes_contents_that_crossed_levels(desk_scenario) -> None:
    simulation = Simulation(desk_scenario(), redact_inter_clearance=True)
    simulation.run()

    crossed = simulation.players[0].info.created["0:0"]
    kept = simulation.players[2].info.created["2:0"]
    assert crossed.content == bytes(len(crossed.content))
    assert kept.content != bytes(len(kept.content))


def test_replay_reproduces_verdicts(desk_scenario) -> None:
    report = run(desk_scenario())

    assert replay_report(report) == []
    assert check_conservation(report) == []


def test_replay_notices_a_doctored_verdict(desk_scenario) -> None:
    report = run(desk_scenario())
    check = report.checks[0]
    doctored = check.model_copy(
        update={"verdicts": [Verdict(player=v.player, outcome=Outcome.LOYAL, round=v.round) for v in check.verdicts]}
    )
    report = report.model_copy(update={"checks": [doctored, *report.checks[1:]]})

    assert replay_report(report) == ["check at round 4: verdicts differ for players [5]"]


def test_rounds_are_causal(desk_scenario) -> None:
    report = run(desk_scenario())

    for check in report.checks:
        assert all(disclosure.round == check.round for disclosure in check.disclosures)
        assert all(verdict.round == check.round for verdict in check.verdicts)
    rounds = [entry.round for entry in report.registry]
    assert rounds == sorted(rounds)
    assert max(rounds) <= report.checks[-1].round


def test_colluding_traitors_escape_detection() -> None:
    traitor = lambda partner: {  # noqa: E731
        "tag": "traitor_colluding",
        "params": {"partners": [partner], "request_rate": 0},
    }
    scenario = Scenario.model_validate(
        {
            "players": [
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret", "behavior": traitor(6)},
                {"clearance": "secret", "behavior": traitor(5)},
            ],
            "rounds": 3,
            "check_every": 3,
            "assumed_m": 2,
            "authoring_schedule": [{"round": 0, "player": 5, "level": "secret"}],
        }
    )

    report = run(scenario)

    assert report.ground_truth is not None
    assert report.ground_truth.exchanges == 1
    assert report.ground_truth.first_acquisition == {6: 1}
    assert not any(verdict.curious for check in report.checks for verdict in check.ratified)
    assert report.metrics is not None
    assert report.metrics.false_negatives == 2
    assert report.registry == []


def test_traitor_leaks_a_registered_document_and_is_caught() -> None:
    traitor = lambda partner: {  # noqa: E731
        "tag": "traitor_colluding",
        "params": {"partners": [partner], "request_rate": 0},
    }
    scenario = Scenario.model_validate(
        {
            "players": [
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret"},
                {"clearance": "secret", "behavior": traitor(4)},
                {"clearance": "secret", "behavior": traitor(3)},
                {"clearance": "secret"},
                {"clearance": "secret"},
            ],
            "rounds": 3,
            "check_every": 3,
            "assumed_m": 2,
            "authoring_schedule": [{"round": 0, "player": 0, "level": "secret", "need_to_know": [3]}],
        }
    )

    report = run(scenario)

    flagged = {verdict.player for verdict in report.checks[-1].ratified if verdict.curious}
    assert flagged == {3}
    kinds = {evidence.kind for evidence in report.checks[-1].ratified[3].evidence}
    assert kinds == {EvidenceKind.UNDISCLOSED_HOLDING}


def test_metrics_from_counts_detection_delay() -> None:
    def verdict(pid: int, curious: bool, round: int) -> Verdict:
        if curious:
            evidence = (Evidence(kind=EvidenceKind.MISSING_DISCLOSURE, detail="withheld"),)
            return Verdict(player=pid, outcome=Outcome.CURIOUS, evidence=evidence, round=round)
        return Verdict(player=pid, outcome=Outcome.LOYAL, round=round)

    def check(round: int, flagged: set[int]) -> CheckRecord:
        verdicts = [verdict(pid, pid in flagged, round) for pid in range(4)]
        return CheckRecord(
            round=round,
            disclosures=[],
            verdicts=verdicts,
            ratified=verdicts,
            agreement=True,
            ba_messages=10,
            bound_exceeded=False,
            assumptions_hold=True,
            truth=[],
        )

    truth = GroundTruth(
        tags={0: BehaviorTag.LOYAL, 1: BehaviorTag.CURIOUS_OVERT, 2: BehaviorTag.LOYAL, 3: BehaviorTag.TRAITOR_COLLUDING},
        first_acquisition={1: 4, 3: 2},
    )

    metrics = metrics_from([check(4, {1}), check(9, {1, 2})], truth)

    assert (metrics.true_positives, metrics.false_positives, metrics.false_negatives) == (1, 1, 1)
    assert metrics.rounds_to_detection == {1: 0}
    assert metrics.ba_messages == 20
