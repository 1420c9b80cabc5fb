#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "drainwatch/txdata.hpp"

using namespace drainwatch;
using namespace drainwatch::txdata;

namespace {

TransferEvent ev(std::string tx, int64_t log_index, TokenKind kind, std::string contract,
                 std::string token_id, std::string from, std::string to, double amount,
                 int64_t ts) {
    return TransferEvent{std::move(tx), log_index,      kind,   std::move(contract),
                         std::move(token_id), std::move(from), std::move(to), amount, ts};
}

}  // namespace

TEST_CASE("kind names roundtrip and reject unknowns") {
    for (TxKind k : {TxKind::MINT, TxKind::SALE, TxKind::GIFT, TxKind::BURN})
        CHECK(tx_kind_from_name(tx_kind_name(k)) == k);
    CHECK_THROWS_AS(tx_kind_from_name("swap"), DataError);
}

TEST_CASE("strict parsing names the offending line; lenient counts skips") {
    std::string good =
        R"({"tx_hash":"t1","log_index":0,"token_kind":"NFT","contract":"c","token_id":"1",)"
        R"("from":"a","to":"b","amount":1.0,"timestamp":100})";
    std::string bad = R"({"tx_hash":"t2")";

    std::istringstream strict(good + "\n" + bad + "\n");
    CHECK_THROWS_WITH_AS(parse_transfer_events(strict),
                         doctest::Contains("line 2"), DataError);

    std::istringstream lenient(good + "\n" + bad + "\n" + good + "\n");
    ParseResult r = parse_transfer_events(lenient, {.lenient = true});
    CHECK(r.events.size() == 2);
    CHECK(r.skipped == 1);
}

TEST_CASE("parser rejects negative amounts and NFT events without token ids") {
    std::string neg =
        R"({"tx_hash":"t","log_index":0,"token_kind":"ETHER","contract":"","token_id":"",)"
        R"("from":"a","to":"b","amount":-1.0,"timestamp":5})";
    std::istringstream in1(neg);
    CHECK_THROWS_AS(parse_transfer_events(in1), DataError);

    std::string no_id =
        R"({"tx_hash":"t","log_index":0,"token_kind":"NFT","contract":"c","token_id":"",)"
        R"("from":"a","to":"b","amount":1.0,"timestamp":5})";
    std::istringstream in2(no_id);
    CHECK_THROWS_AS(parse_transfer_events(in2), DataError);
}

TEST_CASE("events and records survive a JSONL write/read roundtrip") {
    std::vector<TransferEvent> events{
        ev("t1", 0, TokenKind::NFT, "c", "7", "a", "b", 1.0, 100),
        ev("t1", 1, TokenKind::ETHER, "", "", "b", "a", 2.5, 100),
    };
    std::ostringstream eout;
    write_events_jsonl(eout, events);
    std::istringstream ein(eout.str());
    ParseResult parsed = parse_transfer_events(ein);
    REQUIRE(parsed.events.size() == 2);
    CHECK(parsed.events[0].token_id == "7");
    CHECK(parsed.events[1].amount == 2.5);

    std::vector<TransactionRecord> records{
        {"c", "7", "a", "b", TxKind::SALE, 2.5, 100, "t1"},
    };
    std::ostringstream rout;
    write_records_jsonl(rout, records);
    std::istringstream rin(rout.str());
    auto back = read_records_jsonl(rin);
    REQUIRE(back.size() == 1);
    CHECK(back[0].kind == TxKind::SALE);
    CHECK(back[0].price_eth == 2.5);
    CHECK(back[0].token() == "c/7");
}

TEST_CASE("marketplace payment hops flatten to one net payment") {
    std::vector<TransferEvent> events{
        ev("t1", 0, TokenKind::NFT, "c", "1", "seller", "buyer", 1.0, 10),
        ev("t1", 1, TokenKind::ETHER, "", "", "buyer", "mkt", 5.0, 10),
        ev("t1", 2, TokenKind::ETHER, "", "", "mkt", "seller", 4.5, 10),
    };
    PaymentIndex idx = build_payment_index(events, {"mkt"});
    REQUIRE(idx.count("t1") == 1);
    REQUIRE(idx["t1"].size() == 1);
    const Payment& p = idx["t1"][0];
    CHECK(p.payer == "buyer");
    CHECK(p.payee == "seller");
    CHECK(p.amount_eth == 4.5);
    CHECK(p.via_marketplace);
}

TEST_CASE("payments not through a marketplace pass through unchanged") {
    std::vector<TransferEvent> events{
        ev("t1", 0, TokenKind::ETHER, "", "", "x", "y", 3.0, 10),
    };
    PaymentIndex idx = build_payment_index(events, {"mkt"});
    REQUIRE(idx["t1"].size() == 1);
    CHECK_FALSE(idx["t1"][0].via_marketplace);
    CHECK(idx["t1"][0].amount_eth == 3.0);
}

TEST_CASE("classification: mint, burn, direct sale, marketplace sale, gift") {
    const std::string null_acc = kNullAccount;
    std::vector<TransferEvent> events{
        ev("m1", 0, TokenKind::NFT, "c", "1", null_acc, "alice", 1.0, 10),
        ev("s1", 0, TokenKind::NFT, "c", "1", "alice", "bob", 1.0, 20),
        ev("s1", 1, TokenKind::ETHER, "", "", "bob", "alice", 2.0, 20),
        ev("s2", 0, TokenKind::NFT, "c", "1", "bob", "carol", 1.0, 30),
        ev("s2", 1, TokenKind::FT, "", "", "carol", "mkt", 6.0, 30),
        ev("s2", 2, TokenKind::FT, "", "", "mkt", "bob", 5.4, 30),
        ev("g1", 0, TokenKind::NFT, "c", "1", "carol", "dave", 1.0, 40),
        ev("b1", 0, TokenKind::NFT, "c", "1", "dave", null_acc, 1.0, 50),
    };
    auto records = classify_all(events, {"mkt"});
    REQUIRE(records.size() == 5);
    CHECK(records[0].kind == TxKind::MINT);
    CHECK(records[1].kind == TxKind::SALE);
    CHECK(records[1].price_eth == 2.0);
    CHECK(records[2].kind == TxKind::SALE);
    CHECK(records[2].price_eth == doctest::Approx(5.4));
    CHECK(records[3].kind == TxKind::GIFT);
    CHECK(records[3].price_eth == 0.0);
    CHECK(records[4].kind == TxKind::BURN);
}

TEST_CASE("payment in the wrong direction does not make a sale") {
    // Seller pays buyer: still a gift (no buyer->seller value flow).
    std::vector<TransferEvent> events{
        ev("t1", 0, TokenKind::NFT, "c", "1", "a", "b", 1.0, 10),
        ev("t1", 1, TokenKind::ETHER, "", "", "a", "b", 9.0, 10),
    };
    auto records = classify_all(events, {});
    REQUIRE(records.size() == 1);
    CHECK(records[0].kind == TxKind::GIFT);
}

TEST_CASE("multiple payments to the seller in one tx are summed into the price") {
    std::vector<TransferEvent> events{
        ev("t1", 0, TokenKind::NFT, "c", "1", "a", "b", 1.0, 10),
        ev("t1", 1, TokenKind::ETHER, "", "", "b", "a", 1.25, 10),
        ev("t1", 2, TokenKind::FT, "", "", "b", "a", 0.75, 10),
    };
    auto records = classify_all(events, {});
    REQUIRE(records.size() == 1);
    CHECK(records[0].kind == TxKind::SALE);
    CHECK(records[0].price_eth == doctest::Approx(2.0));
}

TEST_CASE("classify_all output is sorted by timestamp, tx hash, log order") {
    std::vector<TransferEvent> events{
        ev("b", 1, TokenKind::NFT, "c", "2", "u", "v", 1.0, 20),
        ev("b", 0, TokenKind::NFT, "c", "1", "u", "v", 1.0, 20),
        ev("a", 0, TokenKind::NFT, "c", "3", "u", "v", 1.0, 10),
        ev("c", 0, TokenKind::NFT, "c", "4", "u", "v", 1.0, 20),
    };
    auto records = classify_all(events, {});
    REQUIRE(records.size() == 4);
    CHECK(records[0].token_id == "3");
    CHECK(records[1].token_id == "1");
    CHECK(records[2].token_id == "2");
    CHECK(records[3].token_id == "4");
}

TEST_CASE("classify_transfer rejects non-NFT events") {
    TransferEvent e = ev("t", 0, TokenKind::ETHER, "", "", "a", "b", 1.0, 10);
    CHECK_THROWS_AS(classify_transfer(e, {}), DataError);
}
