#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "drainwatch/evasion.hpp"

using namespace drainwatch;
using namespace drainwatch::evasion;
using txdata::TransactionRecord;
using txdata::TxKind;

namespace {

constexpr int64_t kDay = 86400;

TransactionRecord rec(std::string token_id, std::string from, std::string to, TxKind kind,
                      double price, int64_t ts) {
    return TransactionRecord{"c", std::move(token_id), std::move(from), std::move(to),
                             kind,  price,              ts,              "tx" + std::to_string(ts)};
}

// A drainer with 4 gift-ins over days 10..40, plus token price history.
std::vector<TransactionRecord> drain_fixture() {
    std::vector<TransactionRecord> r;
    for (int i = 0; i < 4; ++i) {
        std::string tok = std::to_string(i);
        r.push_back(rec(tok, kNullAccount, "v", TxKind::MINT, 0, i * kDay));
        r.push_back(rec(tok, "m", "v", TxKind::SALE, 2.0, (i + 1) * kDay));  // price history
        r.push_back(rec(tok, "v", "drainer", TxKind::GIFT, 0, (10 + 10 * i) * kDay));
    }
    return r;
}

}  // namespace

TEST_CASE("attack specs validate their parameters") {
    AttackSpec bad_level{AttackKind::MINT, 0.0, 10.0, 0};
    CHECK_THROWS_AS(bad_level.validate(), UsageError);
    AttackSpec bad_pay{AttackKind::PAY_VICTIM, 50.0, 75.0, 0};
    CHECK_THROWS_AS(bad_pay.validate(), UsageError);
    AttackSpec ok{AttackKind::COMBO, 50.0, 60.0, 0};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("attack numbers map to kinds and reject out-of-range values") {
    CHECK(attack_from_number(1, 50, 10, 0).kind == AttackKind::MINT);
    CHECK(attack_from_number(2, 50, 10, 0).kind == AttackKind::TIMESPAN);
    CHECK(attack_from_number(3, 50, 10, 0).kind == AttackKind::PAY_VICTIM);
    CHECK(attack_from_number(4, 50, 10, 0).kind == AttackKind::COMBO);
    CHECK_THROWS_AS(attack_from_number(5, 50, 10, 0), UsageError);
}

TEST_CASE("mint attack adds ceil(L% of gift-ins) throwaway mints inside the window") {
    auto records = drain_fixture();
    AttackResult res = apply_attack(records, {"drainer"}, {AttackKind::MINT, 50.0, 10.0, 7});
    // 4 gift-ins, L=50 -> 2 new mints
    int added = 0;
    for (const auto& r : res.records) {
        if (r.kind == TxKind::MINT && r.to == "drainer") {
            ++added;
            CHECK(r.from == kNullAccount);
            CHECK(r.timestamp >= 10 * kDay);
            CHECK(r.timestamp <= 40 * kDay);
        }
    }
    CHECK(added == 2);
    CHECK(res.records.size() == records.size() + 2);
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0].records_added == 2);
    CHECK(res.audit[0].records_converted == 0);
    // non-drainer records untouched
    CHECK(std::count_if(res.records.begin(), res.records.end(),
                        [](const TransactionRecord& r) { return r.kind == TxKind::SALE; }) == 4);
}

TEST_CASE("timespan attack back-dates a self-mint by L% of the active span") {
    auto records = drain_fixture();
    AttackResult res = apply_attack(records, {"drainer"}, {AttackKind::TIMESPAN, 50.0, 10.0, 0});
    // drainer active 10..40 days -> span 30, delta 15 days -> mint at day -5
    REQUIRE(res.records.size() == records.size() + 1);
    const auto& first = res.records.front();  // re-sorted, the back-dated mint leads
    CHECK(first.kind == TxKind::MINT);
    CHECK(first.to == "drainer");
    CHECK(first.timestamp == (10 - 15) * kDay);
}

TEST_CASE("pay-victim attack converts a seeded sample of gift-ins to discounted sales") {
    auto records = drain_fixture();
    AttackResult res = apply_attack(records, {"drainer"}, {AttackKind::PAY_VICTIM, 50.0, 60.0, 3});
    int converted = 0;
    for (const auto& r : res.records) {
        if (r.kind == TxKind::SALE && r.to == "drainer") {
            ++converted;
            // each token's only sale was 2.0 ETH; X=60 -> 1.2
            CHECK(r.price_eth == doctest::Approx(0.6 * 2.0));
        }
    }
    CHECK(converted == 2);  // ceil(50% of 4)
    CHECK(res.records.size() == records.size());  // conversions add nothing
    CHECK(res.drainers_skipped == 0);
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0].records_converted == 2);
}

TEST_CASE("pay-victim skips drainers without gift-ins and counts them") {
    std::vector<TransactionRecord> records{
        rec("1", kNullAccount, "lone_drainer", TxKind::MINT, 0, 0),
        rec("1", "lone_drainer", "x", TxKind::SALE, 1.0, kDay),
    };
    AttackResult res =
        apply_attack(records, {"lone_drainer"}, {AttackKind::PAY_VICTIM, 50.0, 60.0, 0});
    CHECK(res.drainers_skipped == 1);
    CHECK(res.records.size() == records.size());
}

TEST_CASE("combo applies payment conversion plus both mint variants") {
    auto records = drain_fixture();
    AttackResult res = apply_attack(records, {"drainer"}, {AttackKind::COMBO, 50.0, 60.0, 1});
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0].records_converted == 2);  // pay-victim at L=50
    // timespan mint + ceil(50% of the 2 gift-ins left after conversion)
    CHECK(res.audit[0].records_added == 2);
    CHECK(res.records.size() == records.size() + 2);
}

TEST_CASE("attacks are deterministic per seed and output stays time-sorted") {
    auto records = drain_fixture();
    AttackSpec spec{AttackKind::COMBO, 50.0, 60.0, 5};
    AttackResult a = apply_attack(records, {"drainer"}, spec);
    AttackResult b = apply_attack(records, {"drainer"}, spec);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].tx_hash == b.records[i].tx_hash);
        CHECK(a.records[i].timestamp == b.records[i].timestamp);
    }
    for (size_t i = 1; i < a.records.size(); ++i)
        CHECK(a.records[i - 1].timestamp <= a.records[i].timestamp);
}

TEST_CASE("defense sample splits round(fraction*n) accounts deterministically") {
    std::vector<std::string> accounts;
    for (int i = 0; i < 100; ++i) accounts.push_back("a" + std::to_string(i));
    std::vector<std::string> retrain, eval;
    split_defense_sample(accounts, 0.03, 11, retrain, eval);
    CHECK(retrain.size() == 3);
    CHECK(eval.size() == 97);
    // disjoint and exhaustive
    std::unordered_set<std::string> all(retrain.begin(), retrain.end());
    for (const auto& a : eval) CHECK(all.insert(a).second);
    CHECK(all.size() == 100);

    std::vector<std::string> retrain2, eval2;
    split_defense_sample(accounts, 0.03, 11, retrain2, eval2);
    CHECK(retrain == retrain2);

    std::vector<std::string> r3, e3;
    CHECK_THROWS_AS(split_defense_sample({"only"}, 0.03, 0, r3, e3), DataError);
}
