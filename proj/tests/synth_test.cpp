#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "drainwatch/synth.hpp"

using namespace drainwatch;
using namespace drainwatch::synth;

namespace {

SynthConfig small_config(uint64_t seed = 7) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_regular = 300;
    cfg.n_drainers = 12;
    cfg.n_collections = 10;
    return cfg;
}

}  // namespace

TEST_CASE("label names roundtrip") {
    for (Label l : {Label::REGULAR, Label::DRAINER, Label::AFFILIATED, Label::VICTIM})
        CHECK(label_from_name(label_name(l)) == l);
    CHECK_THROWS_AS(label_from_name("wizard"), DataError);
}

TEST_CASE("config validation rejects inconsistent settings") {
    SynthConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    SynthConfig bad = cfg;
    bad.n_regular = -1;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = cfg;
    bad.start_ts = bad.end_ts;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = cfg;
    bad.drainer.frac_gift_in_only = 1.5;
    CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("generation is deterministic per seed") {
    SynthResult a = generate_ecosystem(small_config(7));
    SynthResult b = generate_ecosystem(small_config(7));
    REQUIRE(a.events.size() == b.events.size());
    for (size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].tx_hash == b.events[i].tx_hash);
        CHECK(a.events[i].timestamp == b.events[i].timestamp);
        CHECK(a.events[i].amount == b.events[i].amount);
    }
    SynthResult c = generate_ecosystem(small_config(8));
    bool differs = a.events.size() != c.events.size();
    for (size_t i = 0; !differs && i < a.events.size(); ++i)
        differs = a.events[i].tx_hash != c.events[i].tx_hash;
    CHECK(differs);
}

TEST_CASE("generated population matches the configured counts") {
    SynthConfig cfg = small_config();
    SynthResult res = generate_ecosystem(cfg);
    int drainers = 0;
    for (const auto& [acc, l] : res.labels)
        if (l == Label::DRAINER) ++drainers;
    CHECK(drainers == cfg.n_drainers);
    CHECK(res.events.size() > 1000);  // a real ecosystem, not a stub
    CHECK_FALSE(res.affiliated.empty());
    CHECK_FALSE(res.marketplace_accounts.empty());
    // affiliates are labeled and are never drainers
    for (const auto& a : res.affiliated) {
        REQUIRE(res.labels.count(a) == 1);
        CHECK(res.labels.at(a) == Label::AFFILIATED);
    }
    // events stay inside the configured time range
    for (const auto& e : res.events) {
        CHECK(e.timestamp >= cfg.start_ts);
        CHECK(e.timestamp <= cfg.end_ts);
    }
}

TEST_CASE("every drainer receives gifted NFTs") {
    SynthResult res = generate_ecosystem(small_config());
    auto records = txdata::classify_all(res.events, res.marketplace_accounts);
    std::unordered_map<std::string, int> gift_ins;
    for (const auto& r : records)
        if (r.kind == txdata::TxKind::GIFT) gift_ins[r.to]++;
    for (const auto& [acc, l] : res.labels)
        if (l == Label::DRAINER) CHECK(gift_ins[acc] > 0);
}

TEST_CASE("ground-truth fate table covers every drained NFT exactly once") {
    SynthResult res = generate_ecosystem(small_config());
    auto records = txdata::classify_all(res.events, res.marketplace_accounts);
    measure::AccountSet drainers;
    for (const auto& [acc, l] : res.labels)
        if (l == Label::DRAINER) drainers.insert(acc);
    auto measured = measure::drained_nft_fates(records, drainers);
    int64_t measured_total = 0, truth_total = 0;
    for (const auto& [fate, row] : measured) measured_total += row.count;
    for (const auto& [fate, row] : res.fates) truth_total += row.count;
    CHECK(measured_total == truth_total);
}

TEST_CASE("labels csv roundtrips") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "drainwatch_synth_test";
    fs::create_directories(dir);
    std::string path = (dir / "labels.csv").string();
    std::unordered_map<std::string, Label> labels{
        {"a", Label::DRAINER}, {"b", Label::REGULAR}, {"c", Label::AFFILIATED}};
    write_labels_csv(path, labels);
    auto back = read_labels_csv(path);
    CHECK(back == labels);
    fs::remove_all(dir);
}

TEST_CASE("key=value config mapping picks up synth settings") {
    KvConfig kv = KvConfig::from_string("seed = 5\nn_regular = 77\nn_drainers = 9\n");
    SynthConfig cfg = SynthConfig::from_kv(kv);
    CHECK(cfg.seed == 5);
    CHECK(cfg.n_regular == 77);
    CHECK(cfg.n_drainers == 9);
    CHECK(cfg.n_collections == SynthConfig{}.n_collections);  // untouched default
}
