"""Annotation workflow: votes, third votes, review/trust, export, replay."""

import pytest
from fastapi.testclient import TestClient

from tvcp.dataset import load_and_validate
from tvcp.errors import (
    ContractError,
    NotFoundError,
    RequestValidationError,
    StateConflictError,
)
from tvcp.service import (
    AnnotationService,
    ServiceState,
    create_app,
    create_hit_batches,
)


def statements(n, prefix="s"):
    return [
        {"statement_id": f"{prefix}{i:03d}", "text": f"I am working on project number {i} today"}
        for i in range(n)
    ]


def fresh_service(n_statements=10, **kwargs):
    service = AnnotationService(**kwargs)
    service.add_statements(statements(n_statements))
    return service


def accept_target(service, statement_id, duration="2h_6h"):
    """Drive one statement to accepted via two agreeing votes.

    Voting happens per batch HIT, so sibling statements in the same batch
    resolve alongside; already-accepted statements are left alone.
    """
    if service.state.statements[statement_id].status == "accepted":
        return statement_id
    hit_id = None
    for hid in sorted(service.state.hits):
        hit = service.state.hits[hid]
        if (
            hit.kind == "duration"
            and hit.status == "open"
            and statement_id in hit.statement_ids
        ):
            hit_id = hid
            break
    assert hit_id is not None, f"no open duration HIT covers {statement_id}"
    hit = service.state.hits[hit_id]
    for voter in (f"v1-{hit_id}", f"v2-{hit_id}"):
        votes = {sid: duration for sid in hit.statement_ids}
        service.submit_votes(hit_id, voter, votes)
    assert service.state.statements[statement_id].status == "accepted"
    return statement_id


def followup_hit_for(service, target_id):
    for hid in sorted(service.state.hits):
        hit = service.state.hits[hid]
        if hit.kind == "followup" and hit.statement_ids == [target_id]:
            return hit
    return None


def valid_entries(original="2h_6h"):
    return [
        {"label": "DEC", "text": "it got cancelled", "updated": "15m_45m"},
        {"label": "UNC", "text": "nice weather today", "updated": original},
        {"label": "INC", "text": "it was postponed", "updated": "1d_3d"},
    ]


# -- batching -------------------------------------------------------------


def test_create_hit_batches_duration_chunks_of_ten():
    ids = [f"s{i}" for i in range(25)]
    batches = create_hit_batches(ids, "duration")
    assert [len(b) for b in batches] == [10, 10, 5]
    assert create_hit_batches([], "duration") == []


def test_create_hit_batches_followup_singletons():
    batches = create_hit_batches(["a", "b", "c", "d"], "followup")
    assert batches == [["a"], ["b"], ["c"], ["d"]]
    with pytest.raises(ContractError):
        create_hit_batches(["a"], "translation")


def test_followup_hits_over_unaccepted_targets_rejected():
    service = fresh_service(2)
    with pytest.raises(ContractError, match="pending"):
        service.create_followup_hits(["s000"])
    # discard s000/s001 via stationary votes, then try again
    hit_id = sorted(service.state.hits)[0]
    hit = service.state.hits[hit_id]
    for voter in ("a1", "a2"):
        service.submit_votes(hit_id, voter, {sid: "stationary" for sid in hit.statement_ids})
    assert service.state.statements["s000"].status == "discarded"
    with pytest.raises(ContractError, match="discarded"):
        service.create_followup_hits(["s000"])
    with pytest.raises(NotFoundError):
        service.create_followup_hits(["ghost"])


def test_add_statements_creates_duration_hits():
    service = fresh_service(12)
    duration_hits = [h for h in service.state.hits.values() if h.kind == "duration"]
    assert sorted(len(h.statement_ids) for h in duration_hits) == [2, 10]
    assert all(h.assignments_needed == 2 for h in duration_hits)


# -- votes -----------------------------------------------------------------


def test_two_agreeing_votes_accept_and_open_followup():
    service = fresh_service(3)
    hit_id = sorted(service.state.hits)[0]
    hit = service.state.hits[hit_id]
    votes = {sid: "2h_6h" for sid in hit.statement_ids}
    service.submit_votes(hit_id, "alice", votes)
    assert service.state.statements[hit.statement_ids[0]].status == "pending"
    service.submit_votes(hit_id, "bob", votes)
    for sid in hit.statement_ids:
        statement = service.state.statements[sid]
        assert statement.status == "accepted"
        assert statement.resolved == "2h_6h"
        assert followup_hit_for(service, sid) is not None
    assert service.state.hits[hit_id].status == "submitted"


def test_disagreeing_votes_enter_third_vote_queue():
    service = fresh_service(2)
    hit_id = sorted(service.state.hits)[0]
    hit = service.state.hits[hit_id]
    sid = hit.statement_ids[0]
    service.submit_votes(hit_id, "alice", {s: "2h_6h" for s in hit.statement_ids})
    service.submit_votes(hit_id, "bob", {sid: "1d_3d", hit.statement_ids[1]: "2h_6h"})
    statement = service.state.statements[sid]
    assert statement.status == "pending"
    assert statement.third_vote_requested
    third_hits = [h for h in service.state.hits.values() if h.third_vote]
    assert len(third_hits) == 1 and third_hits[0].statement_ids == [sid]
    # neither original voter may take the third-vote HIT
    assert service.next_hit("duration", "alice") is None or (
        service.next_hit("duration", "alice")["hit_id"] != third_hits[0].hit_id
    )
    view = service.next_hit("duration", "carol")
    assert view is not None and view["hit_id"] == third_hits[0].hit_id
    # third vote resolves by majority
    service.submit_votes(third_hits[0].hit_id, "carol", {sid: "1d_3d"})
    assert service.state.statements[sid].status == "accepted"
    assert service.state.statements[sid].resolved == "1d_3d"
    assert service.state.statements[sid].resolved_after_third


def test_stationary_majority_discards():
    service = fresh_service(1)
    hit_id = sorted(service.state.hits)[0]
    sid = statements(1)[0]["statement_id"]
    service.submit_votes(hit_id, "a1", {sid: "stationary"})
    service.submit_votes(hit_id, "a2", {sid: "stationary"})
    statement = service.state.statements[sid]
    assert statement.status == "discarded"
    assert statement.discard_reason == "boundary"
    assert followup_hit_for(service, sid) is None


def test_three_way_disagreement_discards_no_majority():
    service = fresh_service(1)
    hit_id = sorted(service.state.hits)[0]
    sid = statements(1)[0]["statement_id"]
    service.submit_votes(hit_id, "a1", {sid: "2h_6h"})
    service.submit_votes(hit_id, "a2", {sid: "1d_3d"})
    third = [h for h in service.state.hits.values() if h.third_vote][0]
    service.submit_votes(third.hit_id, "a3", {sid: "1w_4w"})
    statement = service.state.statements[sid]
    assert statement.status == "discarded"
    assert statement.discard_reason == "no_majority"
    assert statement.resolved_after_third


def test_vote_conflicts_and_validation():
    service = fresh_service(2)
    hit_id = sorted(service.state.hits)[0]
    hit = service.state.hits[hit_id]
    votes = {sid: "2h_6h" for sid in hit.statement_ids}
    service.submit_votes(hit_id, "alice", votes)
    with pytest.raises(StateConflictError):  # duplicate by same annotator
        service.submit_votes(hit_id, "alice", votes)
    with pytest.raises(RequestValidationError):  # missing statement vote
        service.submit_votes(hit_id, "bob", {hit.statement_ids[0]: "2h_6h"})
    with pytest.raises(RequestValidationError):  # unknown value
        service.submit_votes(hit_id, "bob", {sid: "sideways" for sid in hit.statement_ids})
    service.submit_votes(hit_id, "bob", votes)
    with pytest.raises(StateConflictError):  # closed now
        service.submit_votes(hit_id, "carol", votes)
    with pytest.raises(NotFoundError):
        service.submit_votes("hit-99999", "dave", votes)


# -- follow-up submissions ---------------------------------------------------


def test_followup_submission_accepted_and_queued():
    service = fresh_service(1)
    sid = accept_target(service, "s000")
    hit = followup_hit_for(service, sid)
    ack = service.submit_followups(hit.hit_id, "writer", valid_entries())
    assert ack["queued_for_review"] is True
    submission = service.state.submissions[ack["submission_id"]]
    assert submission.review_state == "pending"
    assert service.state.hits[hit.hit_id].status == "submitted"


def test_followup_validation_errors():
    service = fresh_service(1)
    sid = accept_target(service, "s000")
    hit = followup_hit_for(service, sid)
    # UNC with changed duration
    entries = valid_entries()
    entries[1]["updated"] = "1d_3d"
    with pytest.raises(RequestValidationError, match="mismatch"):
        service.submit_followups(hit.hit_id, "writer", entries)
    # INC with updated below original
    entries = valid_entries()
    entries[2]["updated"] = "5m_15m"
    with pytest.raises(RequestValidationError, match="mismatch"):
        service.submit_followups(hit.hit_id, "writer", entries)
    # duplicate class
    entries = valid_entries()
    entries[1] = dict(entries[2])
    with pytest.raises(RequestValidationError, match="duplicate class"):
        service.submit_followups(hit.hit_id, "writer", entries)
    # incomplete
    with pytest.raises(RequestValidationError, match="incomplete"):
        service.submit_followups(hit.hit_id, "writer", valid_entries()[:2])
    # empty text
    entries = valid_entries()
    entries[0]["text"] = "  "
    with pytest.raises(RequestValidationError, match="empty"):
        service.submit_followups(hit.hit_id, "writer", entries)
    # all failures left the HIT open
    assert service.state.hits[hit.hit_id].status == "open"


# -- review & trust ------------------------------------------------------------


def submit_one(service, index, annotator="writer"):
    sid = accept_target(service, f"s{index:03d}")
    hit = followup_hit_for(service, sid)
    return service.submit_followups(hit.hit_id, annotator, valid_entries())


def test_review_approve_reject_edit_and_counters():
    service = fresh_service(4)
    ack1 = submit_one(service, 0)
    ack2 = submit_one(service, 1)
    ack3 = submit_one(service, 2)

    queue = service.review_queue()
    assert [q["submission_id"] for q in queue] == [
        ack1["submission_id"], ack2["submission_id"], ack3["submission_id"]
    ]
    assert queue[0]["annotator"]["approved"] == 0

    service.review_submission("rev", ack1["submission_id"], "approve", feedback="nice")
    profile = service.state.annotators["writer"]
    assert profile.approved == 1 and profile.rejected == 0

    service.review_submission("rev", ack2["submission_id"], "reject", feedback="too vague")
    assert profile.rejected == 1
    assert service.state.submissions[ack2["submission_id"]].feedback == "too vague"
    # rejected HIT reopens for someone else
    rejected_hit = service.state.submissions[ack2["submission_id"]].hit_id
    assert service.state.hits[rejected_hit].status == "open"

    edited = valid_entries()
    edited[0]["text"] = "they called the whole thing off"
    service.review_submission("rev", ack3["submission_id"], "edit", entries=edited)
    submission = service.state.submissions[ack3["submission_id"]]
    assert submission.review_state == "edited"
    assert submission.entries[0]["text"] == "they called the whole thing off"
    assert profile.approved == 2

    with pytest.raises(StateConflictError):  # already reviewed
        service.review_submission("rev", ack1["submission_id"], "approve")
    with pytest.raises(NotFoundError):
        service.review_submission("rev", "sub-99999", "approve")
    ack4 = submit_one(service, 3)  # still pending
    with pytest.raises(RequestValidationError):
        service.review_submission("rev", ack4["submission_id"], "promote")


def test_trust_threshold_and_spot_checks():
    service = fresh_service(30)
    # 20 reviewed approvals build trust
    for i in range(20):
        ack = submit_one(service, i)
        assert ack["queued_for_review"] is True
        service.review_submission("rev", ack["submission_id"], "approve")
    profile = service.state.annotators["writer"]
    assert profile.trusted and profile.approved == 20

    # submissions 21-24 auto-approve, 25 queues
    for i in range(20, 24):
        ack = submit_one(service, i)
        assert ack["auto_approved"] is True, f"submission {i + 1}"
    assert service.state.annotators["writer"].approved == 24
    ack25 = submit_one(service, 24)
    assert ack25["queued_for_review"] is True
    assert service.state.submissions[ack25["submission_id"]].review_state == "pending"
    # 26-29 auto again, 30 queues
    for i in range(25, 29):
        ack = submit_one(service, i)
        assert ack["auto_approved"] is True
    ack30 = submit_one(service, 29)
    assert ack30["queued_for_review"] is True


def test_annotator_with_19_approvals_still_queued():
    service = fresh_service(20)
    for i in range(19):
        ack = submit_one(service, i)
        service.review_submission("rev", ack["submission_id"], "approve")
    assert not service.state.annotators["writer"].trusted
    ack = submit_one(service, 19)
    assert ack["queued_for_review"] is True


def test_blocked_annotator_gets_no_hits_and_cannot_submit():
    service = fresh_service(2)
    sid = accept_target(service, "s000")
    hit = followup_hit_for(service, sid)
    service.block_annotator("writer")
    with pytest.raises(StateConflictError):
        service.next_hit("followup", "writer")
    with pytest.raises(StateConflictError):
        service.submit_followups(hit.hit_id, "writer", valid_entries())
    view = service.annotator_view("writer")
    assert view["blocked"] is True and view["trusted"] is False


def test_qualification_gate_optional():
    service = AnnotationService(require_qualification=True)
    service.add_statements(statements(1))
    with pytest.raises(StateConflictError):
        service.next_hit("duration", "newbie")
    service.qualify_annotator("newbie")
    assert service.next_hit("duration", "newbie") is not None


# -- export ----------------------------------------------------------------


def test_export_joins_approved_submissions(tmp_path):
    service = fresh_service(3)
    ack_a = submit_one(service, 0, annotator="w1")
    ack_b = submit_one(service, 1, annotator="w2")
    submit_one(service, 2, annotator="w3")  # stays pending
    service.review_submission("rev", ack_a["submission_id"], "approve")
    service.review_submission("rev", ack_b["submission_id"], "reject", feedback="no")

    samples, manifest = service.export_samples()
    assert len(samples) == 3  # only the approved submission
    assert {s.label.value for s in samples} == {"DEC", "UNC", "INC"}
    assert manifest["targets_exported"] == 1
    assert manifest["samples_exported"] == 3
    assert manifest["submissions"] == {"approved": 1, "rejected": 1, "pending": 1}
    assert manifest["vote_bookkeeping"]["accepted_without_third_vote"] == 3

    from tvcp.dataset import write_samples

    out = tmp_path / "export.jsonl"
    write_samples(samples, out)
    loaded, report = load_and_validate(out, mode="strict")
    assert len(loaded) == 3 and not report.errors


def test_export_counts_mirror_vote_bookkeeping():
    service = fresh_service(4)
    hit_id = sorted(service.state.hits)[0]
    hit = service.state.hits[hit_id]
    # one disagreement (s001) inside an otherwise agreeing batch
    votes_a = {sid: "2h_6h" for sid in hit.statement_ids}
    votes_b = dict(votes_a)
    votes_b["s001"] = "1d_3d"
    service.submit_votes(hit_id, "x1", votes_a)
    service.submit_votes(hit_id, "x2", votes_b)
    third = [h for h in service.state.hits.values() if h.third_vote][0]
    service.submit_votes(third.hit_id, "x3", {"s001": "1d_3d"})

    _, manifest = service.export_samples()
    bk = manifest["vote_bookkeeping"]
    assert bk["accepted_after_third_vote"] == 1
    assert bk["accepted_without_third_vote"] == 3
    assert service.state.statements["s001"].resolved == "1d_3d"


# -- replay determinism --------------------------------------------------------


def test_replay_reproduces_state(tmp_path):
    log_path = tmp_path / "events.jsonl"
    service = AnnotationService(log_path=log_path)
    service.add_statements(statements(5))
    accept_target(service, "s000")
    hit = followup_hit_for(service, "s000")
    ack = service.submit_followups(hit.hit_id, "writer", valid_entries())
    service.review_submission("rev", ack["submission_id"], "approve")
    service.block_annotator("troll")

    replayed = service.replay_state()
    assert replayed.snapshot() == service.state.snapshot()

    # a fresh service over the same log restores everything
    resumed = AnnotationService(log_path=log_path)
    assert resumed.state.snapshot() == service.state.snapshot()
    assert ServiceState.fold(resumed.log).snapshot() == service.state.snapshot()


def test_exported_samples_always_label_consistent():
    service = fresh_service(2)
    ack = submit_one(service, 0)
    service.review_submission("rev", ack["submission_id"], "approve")
    samples, _ = service.export_samples()
    from tvcp.schema import derive_tvcp_label

    for sample in samples:
        assert derive_tvcp_label(sample.original, sample.updated) is sample.label


# -- HTTP surface ---------------------------------------------------------------


@pytest.fixture()
def api():
    service = fresh_service(3)
    return service, TestClient(create_app(service))


def test_http_vote_flow_and_status_codes(api):
    service, client = api
    view = client.get("/hits/next", params={"task": "duration", "annotator": "alice"})
    assert view.status_code == 200
    hit = view.json()
    assert hit["kind"] == "duration"
    assert len(hit["options"]) == 12  # 11 classes + stationary

    votes = {s["statement_id"]: "2h_6h" for s in hit["statements"]}
    r = client.post(f"/hits/{hit['hit_id']}/votes",
                    json={"annotator_id": "alice", "votes": votes})
    assert r.status_code == 200
    r = client.post(f"/hits/{hit['hit_id']}/votes",
                    json={"annotator_id": "alice", "votes": votes})
    assert r.status_code == 409
    r = client.post("/hits/hit-99999/votes",
                    json={"annotator_id": "alice", "votes": votes})
    assert r.status_code == 404
    r = client.post(f"/hits/{hit['hit_id']}/votes",
                    json={"annotator_id": "bob", "votes": {"s000": "sideways"}})
    assert r.status_code == 400


def test_http_followup_flow_review_and_export(api):
    service, client = api
    accept_target(service, "s000")
    view = client.get("/hits/next", params={"task": "followup", "annotator": "writer"})
    assert view.status_code == 200
    hit = view.json()
    assert hit["target"]["duration_token"] == "2h_6h"

    bad = valid_entries()
    bad[1]["updated"] = "1d_3d"
    r = client.post(f"/hits/{hit['hit_id']}/followups",
                    json={"annotator_id": "writer", "entries": bad})
    assert r.status_code == 400
    assert any("mismatch" in e for e in r.json()["detail"])

    r = client.post(f"/hits/{hit['hit_id']}/followups",
                    json={"annotator_id": "writer", "entries": valid_entries()})
    assert r.status_code == 200
    submission_id = r.json()["submission_id"]

    queue = client.get("/review/queue").json()["queue"]
    assert queue and queue[0]["submission_id"] == submission_id
    r = client.post(f"/review/{submission_id}",
                    json={"reviewer_id": "rev", "decision": "approve", "feedback": "ok"})
    assert r.status_code == 200
    r = client.post(f"/review/{submission_id}",
                    json={"reviewer_id": "rev", "decision": "approve"})
    assert r.status_code == 409

    exported = client.get("/export").json()
    assert exported["manifest"]["samples_exported"] == 3
    assert len(exported["records"]) == 3


def test_http_no_open_hits_is_404(api):
    service, client = api
    r = client.get("/hits/next", params={"task": "followup", "annotator": "w"})
    assert r.status_code == 404


def test_http_blocked_annotator_conflict(api):
    service, client = api
    r = client.post("/annotators/troll/block", json={"reviewer_id": "rev"})
    assert r.status_code == 200
    r = client.get("/hits/next", params={"task": "duration", "annotator": "troll"})
    assert r.status_code == 409
    r = client.get("/annotators/troll")
    assert r.status_code == 200 and r.json()["blocked"] is True
    r = client.get("/annotators/ghost")
    assert r.status_code == 404
