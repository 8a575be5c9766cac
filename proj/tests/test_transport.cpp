#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "autocompose/transport.hpp"

using namespace autocompose;

TEST_CASE("request encoding matches the wire grammar") {
    RemoteRequest r{1, "c-2-3-6", Itemset{2, 3, 6}};
    CHECK(encode_request(r) == "AC1 REQ c-2-3-6 2,3,6\n");
    CHECK(decode_request("AC1 REQ x 1\n") == RemoteRequest{1, "x", Itemset{1}});
}

TEST_CASE("response encoding matches the wire grammar") {
    CHECK(encode_response(RemoteResponse::ok(150)) == "AC1 OK 150\n");
    CHECK(encode_response(RemoteResponse::error("no such service")) ==
          "AC1 ERR no such service\n");
    CHECK(decode_response("AC1 OK 150\n") == RemoteResponse::ok(150));
    CHECK(decode_response("AC1 ERR no such service\n") ==
          RemoteResponse::error("no such service"));
}

TEST_CASE("version mismatch is a protocol error") {
    CHECK_THROWS_AS(decode_request("AC2 REQ x 1\n"), ProtocolError);
    CHECK_THROWS_AS(decode_response("AC9 OK 1\n"), ProtocolError);
}

TEST_CASE("malformed lines produce structured errors") {
    for (const char* bad :
         {"", "\n", "AC1\n", "AC1 REQ\n", "AC1 REQ x\n", "AC1 REQ x \n", "AC1 REQ x a,b\n",
          "AC1 REQ x 0\n", "AC1 REQ x 1,,2\n", "AC1 NOPE x 1\n", "XX1 REQ x 1\n",
          "AC1 REQ x 1", "AC1 REQ x 1\nAC1 REQ y 2\n"}) {
        CHECK_THROWS_AS(decode_request(bad), ProtocolError);
    }
    for (const char* bad : {"", "\n", "AC1 OK abc\n", "AC1 OK\n", "AC1 OK \n", "AC1 QQ 1\n",
                            "AC1 OK 1", "AC1 OK 99999999999999999999999\n"}) {
        CHECK_THROWS_AS(decode_response(bad), ProtocolError);
    }
}

TEST_CASE("round-trip identity on generated messages") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        RemoteRequest req;
        req.service_id = "svc-" + std::to_string(rng() % 1000);
        int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) req.items.insert(1 + static_cast<int>(rng() % 64));
        CHECK(decode_request(encode_request(req)) == req);

        RemoteResponse ok = RemoteResponse::ok(static_cast<long long>(rng()));
        CHECK(decode_response(encode_response(ok)) == ok);
        RemoteResponse err = RemoteResponse::error("error " + std::to_string(rng()));
        CHECK(decode_response(encode_response(err)) == err);
    }
}

TEST_CASE("fuzzed lines never crash the decoders") {
    std::mt19937 rng(1234);
    std::string alphabet = "ACREQOK1239 ,-\n\t\xffXabcxyz";
    alphabet += '\0';
    for (int trial = 0; trial < 2000; ++trial) {
        std::string line;
        int len = static_cast<int>(rng() % 40);
        for (int i = 0; i < len; ++i) line += alphabet[rng() % alphabet.size()];
        line += '\n';
        try {
            (void)decode_request(line);
        } catch (const ProtocolError&) {
        }
        try {
            (void)decode_response(line);
        } catch (const ProtocolError&) {
        }
    }
}

TEST_CASE("loopback serve and call") {
    PeerServer server;
    server.start("loopback", [](const RemoteRequest& req) {
        if (req.service_id == "known") return RemoteResponse::ok(77);
        return RemoteResponse::error("no such service");
    });
    auto ok = call_peer("loopback", {1, "known", Itemset{1, 2}});
    CHECK(ok == RemoteResponse::ok(77));
    auto err = call_peer("loopback", {1, "unknown", Itemset{1}});
    CHECK(err.status == RemoteResponse::Status::Error);
    server.stop();
    CHECK_THROWS_AS(call_peer("loopback", {1, "known", Itemset{1}}), TransportError);
}

TEST_CASE("tcp serve and call") {
    PeerServer server;
    server.start("127.0.0.1:0", [](const RemoteRequest& req) {
        return RemoteResponse::ok(static_cast<long long>(req.items.size()) * 10);
    });
    std::string endpoint = "127.0.0.1:" + std::to_string(server.port());

    auto resp = call_peer(endpoint, {1, "svc", Itemset{1, 2, 3}});
    CHECK(resp == RemoteResponse::ok(30));

    // Multiple requests on separate connections keep per-request ordering.
    for (int i = 1; i <= 5; ++i) {
        auto r = call_peer(endpoint, {1, "svc", Itemset{i}});
        CHECK(r == RemoteResponse::ok(10));
    }
    server.stop();
}

TEST_CASE("closed endpoint is a transport error") {
    CHECK_THROWS_AS(call_peer("127.0.0.1:1", {1, "svc", Itemset{1}}, 300), TransportError);
}
