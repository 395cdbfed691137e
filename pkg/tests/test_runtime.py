import pytest
from hypothesis import given, settings, strategies as st

from iseec.errors import (
    DuplicateAgentIdError,
    DuplicateCoreRoleError,
    InvalidMessageError,
    MessageBudgetExceededError,
)
from iseec.runtime import (
    AclMessage,
    Agent,
    AgentSpec,
    INFORM,
    MessageBus,
    PAYLOAD_KINDS,
    PERFORMATIVES,
    Payload,
    REQUEST,
    TraceRecord,
)


class Recorder(Agent):
    """Stores everything it receives, sends nothing."""

    def __init__(self, agent_id, role="customer"):
        super().__init__(AgentSpec(agent_id, role))
        self.seen = []

    def handle(self, msg):
        self.seen.append(msg)


class Echo(Agent):
    """Replies to every REQUEST with an INFORM to the sender."""

    def __init__(self, agent_id, bus):
        super().__init__(AgentSpec(agent_id, "service"))
        self.bus = bus

    def handle(self, msg):
        if msg.performative == REQUEST:
            self.bus.send(AclMessage(INFORM, self.agent_id, msg.sender,
                                     msg.conversation_id,
                                     Payload("result", dict(msg.content.data))))


def request(sender="a", receiver="b", conv="conv-1", kind="query", data=None):
    return AclMessage(REQUEST, sender, receiver, conv,
                      Payload(kind, data or {}))


class TestSpawn:
    def test_duplicate_id_rejected(self):
        bus = MessageBus()
        bus.spawn_agent(Recorder("a"))
        with pytest.raises(DuplicateAgentIdError):
            bus.spawn_agent(Recorder("a"))

    def test_duplicate_core_role_rejected(self):
        bus = MessageBus()
        bus.spawn_agent(Recorder("d1", role="discovery"))
        with pytest.raises(DuplicateCoreRoleError):
            bus.spawn_agent(Recorder("d2", role="discovery"))

    def test_many_customers_allowed(self):
        bus = MessageBus()
        for i in range(5):
            bus.spawn_agent(Recorder(f"c{i}", role="customer"))
        assert len(bus.agents_by_role("customer")) == 5

    def test_unknown_role_rejected(self):
        with pytest.raises(InvalidMessageError):
            MessageBus().spawn_agent(Recorder("x", role="janitor"))

    def test_endpoint_shares_id_space(self):
        bus = MessageBus()
        bus.register_endpoint("central-register", lambda m: None)
        with pytest.raises(DuplicateAgentIdError):
            bus.spawn_agent(Recorder("central-register"))
        with pytest.raises(DuplicateAgentIdError):
            bus.register_endpoint("central-register", lambda m: None)


class TestValidation:
    def test_sender_equals_receiver(self):
        with pytest.raises(InvalidMessageError):
            MessageBus().send(request(sender="a", receiver="a"))

    def test_empty_conversation(self):
        with pytest.raises(InvalidMessageError):
            MessageBus().send(request(conv=""))

    def test_unknown_performative(self):
        msg = request()
        msg.performative = "SHOUT"
        with pytest.raises(InvalidMessageError):
            MessageBus().send(msg)

    def test_unknown_payload_kind(self):
        with pytest.raises(InvalidMessageError):
            Payload("gossip")

    def test_performative_payload_legality(self):
        # an AGREE cannot carry a raw query
        msg = AclMessage("AGREE", "a", "b", "conv-1", Payload("query"))
        with pytest.raises(InvalidMessageError):
            MessageBus().send(msg)

    def test_rejected_message_leaves_no_trace(self):
        bus = MessageBus()
        with pytest.raises(InvalidMessageError):
            bus.send(request(conv=""))
        assert len(bus.trace) == 0


class TestDeadLetters:
    def test_unknown_receiver_recorded(self):
        bus = MessageBus()
        bus.spawn_agent(Recorder("a"))
        assert bus.send(request(sender="a", receiver="ghost")) == "dead-letter"
        assert bus.trace.records[-1].dead_letter
        assert bus.trace.records[-1].line().startswith("dead-letter ")

    def test_dead_letter_not_delivered(self):
        bus = MessageBus()
        a = Recorder("a")
        bus.spawn_agent(a)
        bus.send(request(sender="a", receiver="ghost"))
        bus.run_until_idle()
        assert a.seen == []


class TestDelivery:
    def test_fifo_per_mailbox(self):
        bus = MessageBus()
        a = Recorder("a")
        bus.spawn_agent(a)
        for i in range(10):
            bus.send(request(sender="b", receiver="a",
                             data={"n": i}))
        bus.run_until_idle()
        assert [m.content.data["n"] for m in a.seen] == list(range(10))

    def test_message_ids_strictly_increase_in_delivery_order(self):
        bus = MessageBus()
        for aid in ("a", "b", "c"):
            bus.spawn_agent(Recorder(aid))
        for i in range(12):
            bus.send(request(sender="x" + str(i % 2), receiver="abc"[i % 3],
                             conv=f"conv-{i}"))
        trace = bus.run_until_idle(seed=3)
        ids = [r.message_id for r in trace.records]
        assert ids == sorted(ids)
        assert len(set(ids)) == len(ids)

    def test_endpoint_receives_messages(self):
        bus = MessageBus()
        seen = []
        bus.register_endpoint("ep", seen.append)
        bus.send(request(sender="a", receiver="ep"))
        bus.run_until_idle()
        assert len(seen) == 1

    def test_reply_chain(self):
        bus = MessageBus()
        a = Recorder("a")
        bus.spawn_agent(a)
        bus.spawn_agent(Echo("svc", bus))
        bus.send(request(sender="a", receiver="svc", data={"k": 1}))
        bus.run_until_idle()
        assert len(a.seen) == 1
        assert a.seen[0].content.data == {"k": 1}


class TestDeterminism:
    def _busy_bus(self, seed):
        bus = MessageBus()
        for aid in ("a", "b", "c", "d"):
            bus.spawn_agent(Echo(aid, bus))
        bus.spawn_agent(Recorder("z"))
        for i in range(20):
            bus.send(request(sender="z", receiver="abcd"[i % 4],
                             conv=f"conv-{i}", data={"n": i}))
        return bus.run_until_idle(seed=seed)

    def test_same_seed_same_trace(self):
        hashes = {self._busy_bus(42).trace_hash() for _ in range(5)}
        assert len(hashes) == 1

    def test_different_seed_may_differ_but_same_multiset(self):
        t1 = self._busy_bus(1)
        t2 = self._busy_bus(2)
        key = lambda r: (r.performative, r.sender, r.receiver,
                         r.conversation_id, r.payload_kind)
        assert sorted(map(key, t1.records)) == sorted(map(key, t2.records))

    def test_trace_header_names_digest(self):
        bus = MessageBus()
        assert bus.trace.canonical().startswith(
            "# i-seec trace v1 digest=sha256\n")

    def test_trace_hash_is_sha256_of_canonical(self):
        import hashlib
        trace = self._busy_bus(7)
        assert trace.trace_hash() == hashlib.sha256(
            trace.canonical().encode()).hexdigest()


class TestBudget:
    def test_livelock_guard(self):
        class PingPong(Agent):
            def __init__(self, agent_id, peer, bus):
                super().__init__(AgentSpec(agent_id, "service"))
                self.peer, self.bus = peer, bus

            def handle(self, msg):
                self.bus.send(AclMessage(REQUEST, self.agent_id, self.peer,
                                         msg.conversation_id,
                                         Payload("query")))

        bus = MessageBus(budget=200)
        bus.spawn_agent(PingPong("a", "b", bus))
        bus.spawn_agent(PingPong("b", "a", bus))
        bus.send(request(sender="x", receiver="a"))
        with pytest.raises(MessageBudgetExceededError) as exc:
            bus.run_until_idle()
        assert "200" in str(exc.value)


@given(st.sampled_from(PERFORMATIVES), st.sampled_from(PAYLOAD_KINDS))
@settings(max_examples=60, deadline=None)
def test_send_either_validates_or_queues(perf, kind):
    bus = MessageBus()
    bus.spawn_agent(Recorder("b"))
    msg = AclMessage(perf, "a", "b", "conv-1", Payload(kind))
    try:
        assert bus.send(msg) == "accepted"
    except InvalidMessageError:
        assert len(bus.mailboxes["b"]) == 0
