#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

using namespace interlock;
using testutil::make_peg_task;

namespace {

ProposalRequest simple_request(const TaskInstance& task) {
    Environment env = make_environment(task, EnvConfig{});
    return make_proposal_request(env.goal_observation(), env.observation());
}

std::unique_ptr<ExternalPolicy> spawn_double(const std::string& mode) {
    return std::make_unique<ExternalPolicy>(std::make_unique<SubprocessTransport>(
        std::string(INTERLOCK_POLICY_DOUBLE) + " " + mode, 10000));
}

}  // namespace

TEST_CASE("subprocess double answers and the action parses") {
    TaskInstance task = make_peg_task(2, {});
    auto policy = spawn_double("ok");
    RankedActions ranked = policy->propose(simple_request(task), 5);
    REQUIRE(ranked.actions.size() == 1);
    REQUIRE(ranked.first() == Action{Verb::pick_up, 2});
}

TEST_CASE("ungrammatical response text raises an action-parse failure") {
    TaskInstance task = make_peg_task(1, {});
    auto policy = spawn_double("garbage");
    REQUIRE_THROWS_AS(policy->propose(simple_request(task), 1), ActionParseError);
}

TEST_CASE("mismatched response id is a protocol violation") {
    TaskInstance task = make_peg_task(1, {});
    auto policy = spawn_double("wrong-id");
    REQUIRE_THROWS_AS(policy->propose(simple_request(task), 1), ProtocolError);
}

TEST_CASE("non-JSON responses are protocol violations") {
    TaskInstance task = make_peg_task(1, {});
    auto policy = spawn_double("notjson");
    REQUIRE_THROWS_AS(policy->propose(simple_request(task), 1), ProtocolError);
}

TEST_CASE("a silent endpoint times out as PolicyUnavailable") {
    TaskInstance task = make_peg_task(1, {});
    ExternalPolicy policy(std::make_unique<SubprocessTransport>(
        std::string(INTERLOCK_POLICY_DOUBLE) + " silent", 200));
    REQUIRE_THROWS_AS(policy.propose(simple_request(task), 1), PolicyUnavailable);
}

TEST_CASE("reflect requests carry three observations and parse the reply") {
    TaskInstance task = make_peg_task(2, {});
    Environment env = make_environment(task, EnvConfig{});
    auto policy = spawn_double("ok");
    auto req = make_reflection_request(env.goal_observation(), env.observation(),
                                       env.observation(), {"insert green"});
    REQUIRE(policy->reflect(req) == Action{Verb::pick_up, 2});
}

TEST_CASE("soak: thousands of round-trips with zero desyncs") {
    TaskInstance task = make_peg_task(3, {});
    auto policy = spawn_double("first");
    ProposalRequest req = simple_request(task);
    for (int i = 0; i < 10000; ++i) {
        RankedActions ranked = policy->propose(req, 1);
        REQUIRE(ranked.first() == Action{Verb::pick_up, 2});
    }
}

TEST_CASE("tcp transport speaks the same protocol") {
    // minimal in-process line server answering like the "ok" double
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(listener >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::listen(listener, 1) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    const int port = ntohs(addr.sin_port);

    std::thread server([listener] {
        int conn = ::accept(listener, nullptr, nullptr);
        std::string buffer;
        char chunk[4096];
        for (;;) {
            ssize_t n = ::read(conn, chunk, sizeof(chunk));
            if (n <= 0) break;
            buffer.append(chunk, std::size_t(n));
            std::size_t pos;
            while ((pos = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, pos);
                buffer.erase(0, pos + 1);
                Json request = Json::parse(line);
                Json response{{"id", request.at("id")}, {"action", "pick up red"}};
                std::string out = response.dump() + "\n";
                (void)::write(conn, out.data(), out.size());
            }
        }
        ::close(conn);
    });

    {
        TaskInstance task = make_peg_task(1, {});
        ExternalPolicy policy(std::make_unique<TcpTransport>("127.0.0.1", port, 5000));
        for (int i = 0; i < 50; ++i)
            REQUIRE(policy.propose(simple_request(task), 1).first() == Action{Verb::pick_up, 2});
    }
    ::close(listener);
    server.join();
}
