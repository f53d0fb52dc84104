#include <doctest.h>

#include "support/stub_server.hpp"
#include "support/workspace.hpp"
#include "trustsim/agent.hpp"
#include "trustsim/error.hpp"

using namespace trustsim;
using namespace trustsim::testing;

namespace {

DecisionRequest request_for(const GameSpec &game, Role role = Role::Trustor, std::string key = "run/p1/trust/base") {
    static const Roster roster = synthetic_roster(1);
    DecisionRequest r;
    r.bundle = make_bundle(roster.at(0), game, role);
    r.role = role;
    r.space = decision_space_for(game, role);
    r.trial_key = std::move(key);
    r.game = game;
    return r;
}

LlmConfig stub_config(const StubLlmServer &server) {
    LlmConfig c;
    c.model_name = "stub-model";
    c.endpoint_url = server.url();
    c.initial_backoff = std::chrono::duration<double>(0.01);
    c.request_timeout = std::chrono::duration<double>(2.0);
    c.max_retries = 2;
    return c;
}

}  // namespace

TEST_CASE("decision spaces") {
    const auto trust = GameSpec::defaults(GameKind::Trust);
    CHECK(decision_space_for(trust, Role::Trustor) == DecisionSpace::amount({Money{}, Money::dollars(10)}));
    CHECK(decision_space_for(trust, Role::Trustee, Money::dollars(4)) ==
          DecisionSpace::amount({Money{}, Money::dollars(12)}));
    CHECK(decision_space_for(GameSpec::defaults(GameKind::MapTrust, 0.5), Role::Trustor).binary);
}

TEST_CASE("fixed agents") {
    const auto five = scripted_fixed(Money::dollars(5));
    const auto r = five->decide(request_for(GameSpec::defaults(GameKind::Trust)));
    REQUIRE(r.decision);
    CHECK(r.decision->amount() == Money::dollars(5));
    CHECK(r.valid);
    CHECK(r.raw_text == "Finally, I will give 5 dollars.");

    const auto trust = scripted_fixed(TrustChoice::Trust)->decide(request_for(GameSpec::defaults(GameKind::MapTrust, 0.5)));
    CHECK(trust.decision->choice() == TrustChoice::Trust);
    CHECK(trust.valid);

    CHECK_THROWS_AS(scripted_fixed(Money::dollars(12), {Money{}, Money::dollars(10)}), InvalidAgent);
}

TEST_CASE("rational agent") {
    const auto agent = rational_ev_agent();
    auto choice = [&](GameKind kind, double p) {
        return agent->decide(request_for(GameSpec::defaults(kind, p))).decision->choice();
    };
    CHECK(choice(GameKind::MapTrust, 0.2) == TrustChoice::NotTrust);
    CHECK(choice(GameKind::MapTrust, 2.0 / 7.0) == TrustChoice::Trust);
    CHECK(choice(GameKind::LotteryGamble, 0.46) == TrustChoice::NotTrust);
    CHECK(choice(GameKind::LotteryGamble, 0.5) == TrustChoice::Trust);

    TrustChoice previous = TrustChoice::NotTrust;
    for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        const auto c = choice(GameKind::MapTrust, p);
        CHECK((c == TrustChoice::Trust) == (p >= 0.3));
        CHECK_FALSE((previous == TrustChoice::Trust && c == TrustChoice::NotTrust));
        previous = c;
    }
    CHECK(agent->decide(request_for(GameSpec::defaults(GameKind::Trust))).decision->amount() == Money{});
}

TEST_CASE("replay agent") {
    const auto agent = replay_agent({{"k1", "Finally, I will give 10 dollars."}, {"k2", "I refuse to answer."}});
    const auto game = GameSpec::defaults(GameKind::Trust);
    const auto ten = agent->decide(request_for(game, Role::Trustor, "k1"));
    CHECK(ten.decision->amount() == Money::dollars(10));
    CHECK(ten.valid);
    const auto refused = agent->decide(request_for(game, Role::Trustor, "k2"));
    CHECK_FALSE(refused.decision);
    CHECK_FALSE(refused.valid);
    CHECK_THROWS_AS(agent->decide(request_for(game, Role::Trustor, "k3")), MissingCannedResponse);
}

TEST_CASE("chat client against a stub server") {
    StubLlmServer server;
    const auto config = stub_config(server);

    SUBCASE("echo") {
        const auto reply = chat_complete(config, "system text", "hello there");
        CHECK(reply.content == "hello there");
        CHECK(server.requests() == 1);
        const auto sent = nlohmann::json::parse(server.last_request());
        CHECK(sent["temperature"] == 1.0);
        CHECK(sent["messages"].size() == 2);
        CHECK(sent["messages"][0]["role"] == "system");
    }
    SUBCASE("429 then 200") {
        server.script({{429, "{}", 0}, {200, StubLlmServer::completion("ok"), 0}});
        const auto reply = chat_complete(config, "s", "u");
        CHECK(reply.content == "ok");
        CHECK(reply.attempts == 2);
        CHECK(server.requests() == 2);
    }
    SUBCASE("persistent 503 exhausts retries") {
        server.set_fallback([](const std::string &) { return StubLlmServer::Reply{503, "{}", 0}; });
        CHECK_THROWS_AS(chat_complete(config, "s", "u"), TransportError);
        CHECK(server.requests() == 3);
    }
    SUBCASE("missing choices") {
        server.script({{200, R"({"id":"x"})", 0}});
        CHECK_THROWS_AS(chat_complete(config, "s", "u"), MalformedResponse);
    }
    SUBCASE("credential rejected") {
        server.script({{401, "{}", 0}});
        CHECK_THROWS_AS(chat_complete(config, "s", "u"), AuthError);
        CHECK(server.requests() == 1);
    }
    SUBCASE("timeout") {
        auto quick = config;
        quick.request_timeout = std::chrono::duration<double>(0.2);
        quick.max_retries = 0;
        server.script({{200, StubLlmServer::completion("late"), 700}});
        try {
            chat_complete(quick, "s", "u");
            FAIL("expected a timeout");
        } catch (const TransportError &e) {
            CHECK(std::string(e.what()).find("timeout") != std::string::npos);
        }
    }
}

TEST_CASE("llm agent caches and never re-asks by default") {
    StubLlmServer server;
    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir.path());
    const auto agent = llm_agent(stub_config(server), cache);
    const auto request = request_for(GameSpec::defaults(GameKind::Trust));

    server.set_fallback([](const std::string &) { return StubLlmServer::Reply{200, StubLlmServer::completion("Finally, I will give 6 dollars."), 0}; });
    const auto first = agent->decide(request);
    const auto second = agent->decide(request);
    CHECK(first.raw_text == second.raw_text);
    CHECK(server.requests() == 1);
    CHECK(second.provider_meta.at("cache_hit") == "true");

    // A fresh cache object over the same directory is already warm.
    const auto reopened = llm_agent(stub_config(server), std::make_shared<ResponseCache>(dir.path()));
    CHECK(reopened->decide(request).decision->amount() == Money::dollars(6));
    CHECK(server.requests() == 1);

    // Different trial key, different sample.
    auto other = request;
    other.trial_key = "run/p2/trust/base";
    agent->decide(other);
    CHECK(server.requests() == 2);

    server.set_fallback([](const std::string &) { return StubLlmServer::Reply{200, StubLlmServer::completion("Banana sky seven."), 0}; });
    auto nonsense_request = request;
    nonsense_request.trial_key = "run/p3/trust/base";
    const auto nonsense = agent->decide(nonsense_request);
    CHECK_FALSE(nonsense.valid);
    CHECK_FALSE(nonsense.decision);
    CHECK(nonsense.raw_text == "Banana sky seven.");
    CHECK(server.requests() == 3);
}

TEST_CASE("cache keys") {
    LlmConfig c;
    c.model_name = "m";
    const auto bundle = request_for(GameSpec::defaults(GameKind::Trust)).bundle;
    CHECK(llm_cache_key(c, bundle, "a") == llm_cache_key(c, bundle, "a"));
    CHECK(llm_cache_key(c, bundle, "a") != llm_cache_key(c, bundle, "b"));
    auto warmer = c;
    warmer.temperature = 0.7;
    CHECK(llm_cache_key(c, bundle, "a") != llm_cache_key(warmer, bundle, "a"));
}

TEST_CASE("response cache persists and clears") {
    TempDir dir;
    {
        ResponseCache cache(dir.path());
        cache.put("k", {{"x", 1}}, "reply");
        cache.put("k", {{"x", 2}}, "other");
        CHECK(cache.get("k") == "reply");
        CHECK(cache.size() == 1);
    }
    ResponseCache again(dir.path());
    CHECK(again.get("k") == "reply");
    CHECK_FALSE(again.get("missing").has_value());
    ResponseCache::clear(dir.path());
    CHECK(ResponseCache(dir.path()).size() == 0);
}
