#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "drainwatch/harness.hpp"

using namespace drainwatch;
using namespace drainwatch::harness;
using txdata::TransactionRecord;
using txdata::TxKind;

namespace {

constexpr int64_t kDay = 86400;

TransactionRecord rec(std::string token_id, std::string from, std::string to, TxKind kind,
                      double price, int64_t ts) {
    return TransactionRecord{"c", std::move(token_id), std::move(from), std::move(to),
                             kind,  price,              ts,              "tx" + std::to_string(ts)};
}

// Records giving each of n accounts prefix0..prefixN a buy and a sale so they
// qualify for the regular training pool.
void add_pool_accounts(std::vector<TransactionRecord>& records, const std::string& prefix, int n,
                       int tx_per_account = 2) {
    int64_t t = 100 * kDay;
    for (int i = 0; i < n; ++i) {
        std::string who = prefix + std::to_string(i);
        for (int k = 0; k < tx_per_account; k += 2) {
            std::string tok = prefix + std::to_string(i) + "_" + std::to_string(k);
            records.push_back(rec(tok, "seller", who, TxKind::SALE, 1.0, t));
            records.push_back(rec(tok, who, "buyer", TxKind::SALE, 1.1, t + kDay));
            t += 2 * kDay;
        }
    }
}

}  // namespace

TEST_CASE("potential-accomplice filter catches gifters to affiliated users") {
    AccountSet drainers{"d"};
    std::vector<TransactionRecord> records{
        rec("1", kNullAccount, "v", TxKind::MINT, 0, 0),
        rec("1", "v", "d", TxKind::GIFT, 0, kDay),
        rec("1", "d", "mule", TxKind::GIFT, 0, 2 * kDay),        // affiliated
        rec("2", "suspect", "mule", TxKind::GIFT, 0, 3 * kDay),  // gifts to the mule
        rec("3", "clean", "other", TxKind::SALE, 1.0, 4 * kDay),
    };
    AccountSet out = fn_filter_accounts(records, drainers);
    CHECK(out.count("mule") == 1);
    CHECK(out.count("suspect") == 1);
    CHECK(out.count("clean") == 0);
    CHECK(out.count("d") == 0);
}

TEST_CASE("training dataset honours ratios and pool eligibility") {
    AccountSet drainers{"d0", "d1"};
    std::vector<TransactionRecord> records;
    // drainers need any record
    records.push_back(rec("x0", "v", "d0", TxKind::GIFT, 0, kDay));
    records.push_back(rec("x1", "v", "d1", TxKind::GIFT, 0, kDay));
    add_pool_accounts(records, "light", 12);
    add_pool_accounts(records, "heavy", 3, 60);  // > 50 records each
    // ineligible: mint-only account (never received from another user)
    records.push_back(rec("m", kNullAccount, "mint_only", TxKind::MINT, 0, 5 * kDay));
    records.push_back(rec("m", "mint_only", "b", TxKind::SALE, 1.0, 6 * kDay));

    DatasetSpec spec;
    spec.base_ratio = 3.0;
    spec.heavy_ratio = 1.0;
    spec.seed = 5;
    LabeledAccounts ds = build_training_dataset(records, drainers, spec);
    REQUIRE(ds.accounts.size() == 2 + 6 + 2);
    int pos = 0;
    for (int l : ds.labels) pos += l;
    CHECK(pos == 2);
    for (const auto& a : ds.accounts) CHECK(a != "mint_only");

    // deterministic per seed
    LabeledAccounts again = build_training_dataset(records, drainers, spec);
    CHECK(ds.accounts == again.accounts);

    // too-small pool raises
    spec.base_ratio = 100.0;
    CHECK_THROWS_WITH_AS(build_training_dataset(records, drainers, spec),
                         doctest::Contains("PoolTooSmall"), DataError);
}

TEST_CASE("metrics match the textbook definitions") {
    // pred vs truth: tp=2 fp=1 fn=1 tn=2
    MetricsReport m = compute_metrics({1, 1, 1, 0, 0, 0}, {1, 1, 0, 1, 0, 0}, 9);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 2);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.seed == 9);

    MetricsReport zero = compute_metrics({0, 0}, {1, 0});
    CHECK(zero.precision == 0.0);
    CHECK(zero.recall == 0.0);
    CHECK(zero.f1 == 0.0);

    CHECK_THROWS_WITH_AS(compute_metrics({1}, {1, 0}), doctest::Contains("LengthMismatch"),
                         DataError);
}

TEST_CASE("mean metrics average across seeds") {
    std::vector<MetricsReport> runs(2);
    runs[0].precision = 1.0;
    runs[0].recall = 0.5;
    runs[0].f1 = 2.0 / 3.0;
    runs[0].fp = 0;
    runs[0].tp = 5;
    runs[1].precision = 0.5;
    runs[1].recall = 1.0;
    runs[1].f1 = 2.0 / 3.0;
    runs[1].fp = 4;
    runs[1].tp = 9;
    MeanMetrics m = mean_of(runs);
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.75));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.fp == doctest::Approx(2.0));
    CHECK(m.tp == doctest::Approx(7.0));
}

TEST_CASE("pipeline config reads key=value settings with defaults") {
    KvConfig kv = KvConfig::from_string(
        "seed = 4\nn_drainers = 30\nbase_ratio = 7\nattack = 4\nattack_level = 25\n"
        "defend = true\nablation = false\nmax_epochs = 33\n");
    PipelineConfig cfg = PipelineConfig::from_kv(kv);
    CHECK(cfg.synth.seed == 4);
    CHECK(cfg.synth.n_drainers == 30);
    CHECK(cfg.base_ratio == 7.0);
    CHECK(cfg.attack == 4);
    CHECK(cfg.attack_level == 25.0);
    CHECK(cfg.defend);
    CHECK_FALSE(cfg.run_user_only_ablation);
    CHECK(cfg.max_epochs == 33);
    CHECK(cfg.eval_ratio == 100.0);  // untouched default
}

TEST_CASE("end-to-end pipeline smoke run writes reports and trains something") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "drainwatch_harness_smoke";
    fs::remove_all(dir);

    PipelineConfig cfg;
    cfg.synth.seed = 3;
    cfg.synth.n_regular = 1500;
    cfg.synth.n_drainers = 30;
    cfg.base_ratio = 5.0;
    cfg.heavy_ratio = 0.2;
    cfg.eval_ratio = 10.0;
    cfg.n_eval_seeds = 2;
    cfg.max_epochs = 30;
    cfg.patience = 30;
    cfg.run_user_only_ablation = false;

    PipelineResult res = run_pipeline(cfg, dir.string());
    CHECK(res.n_train_drainers > 0);
    CHECK(res.n_train_regulars >= 5 * res.n_train_drainers);
    REQUIRE(res.full_runs.size() == 2);
    CHECK(res.tce_outcome.epochs_run > 0);
    CHECK(res.sce_outcome.epochs_run > 0);
    CHECK(fs::exists(res.report_csv));
    CHECK(fs::exists(res.summary_txt));

    // report lists one row per eval seed plus the header
    std::ifstream in(res.report_csv);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines >= 3);
    fs::remove_all(dir);
}
