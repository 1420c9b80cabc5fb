// Command-line front end for the drainer-detection pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "drainwatch/evasion.hpp"
#include "drainwatch/features.hpp"
#include "drainwatch/harness.hpp"
#include "drainwatch/measure.hpp"
#include "drainwatch/synth.hpp"
#include "drainwatch/txdata.hpp"

namespace fs = std::filesystem;
using namespace drainwatch;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

KvConfig load_config(const std::string& path) {
    return path.empty() ? KvConfig{} : KvConfig::from_file(path);
}

int64_t max_timestamp(const std::vector<txdata::TransactionRecord>& records) {
    int64_t t = 0;
    for (const auto& r : records) t = std::max(t, r.timestamp);
    return t;
}

void cmd_synth(const std::string& config_path, int64_t seed, const std::string& out_dir) {
    auto kv = load_config(config_path);
    if (seed >= 0) kv.set("seed", std::to_string(seed));
    auto cfg = synth::SynthConfig::from_kv(kv);
    auto result = synth::generate_ecosystem(cfg);

    fs::create_directories(out_dir);
    std::ofstream ev(fs::path(out_dir) / "events.jsonl");
    txdata::write_events_jsonl(ev, result.events);
    synth::write_labels_csv((fs::path(out_dir) / "labels.csv").string(), result.labels);
    std::ofstream mk(fs::path(out_dir) / "marketplaces.txt");
    for (const auto& m : result.marketplace_accounts) mk << m << "\n";

    std::cout << "events " << result.events.size() << " accounts " << result.labels.size()
              << " gift-in-only drainers " << result.drainers_gift_in_only << "\n";
}

void cmd_ingest(const std::string& in_path, const std::string& marketplaces_path,
                const std::string& out_path, bool lenient) {
    txdata::ParseOptions opts;
    opts.lenient = lenient;
    auto parsed = txdata::parse_transfer_events_file(in_path, opts);
    std::unordered_set<std::string> marketplaces;
    if (!marketplaces_path.empty()) marketplaces = txdata::read_account_list(marketplaces_path);
    auto records = txdata::classify_all(parsed.events, marketplaces);
    txdata::write_records_file(out_path, records);
    std::cout << "events " << parsed.events.size() << " skipped " << parsed.skipped
              << " records " << records.size() << "\n";
}

void cmd_measure(const std::string& records_path, const std::string& labels_path,
                 const std::string& out_path) {
    auto records = txdata::read_records_file(records_path);
    auto labels = synth::read_labels_csv(labels_path);
    measure::AccountSet drainers;
    for (const auto& [name, l] : labels)
        if (l == synth::Label::DRAINER) drainers.insert(name);

    auto affiliated = measure::find_affiliated_users(records, drainers);
    auto eps = measure::episodes(records, max_timestamp(records));
    auto fates = measure::drained_nft_fates(records, drainers);
    auto ht = measure::holding_time_comparison(eps, drainers, affiliated);
    auto price = measure::price_comparison(records, drainers, affiliated);

    std::ostringstream out;
    out << "drainers " << drainers.size() << " affiliated " << affiliated.size() << "\n";
    for (const auto& [fate, row] : fates) {
        const char* name = fate == measure::DrainFate::SELL          ? "sell"
                           : fate == measure::DrainFate::GIFT_OUT_1  ? "gift_out_once"
                           : fate == measure::DrainFate::GIFT_OUT_MANY ? "gift_out_many"
                                                                       : "hold";
        out << "fate " << name << " " << row.count << " (eventually sold " << row.eventually_sold
            << ")\n";
    }
    out << "holding_time below_avg " << ht.n_below_avg << "/" << ht.n_total << " pd_mean "
        << fmt(ht.percent_decrease_mean) << " pd_std " << fmt(ht.percent_decrease_std)
        << " excluded " << ht.n_excluded << "\n";
    out << "price_vs_avg below " << price.vs_avg.n_below_avg << "/" << price.vs_avg.n_total
        << " pd_mean " << fmt(price.vs_avg.percent_decrease_mean) << "\n";
    out << "price_vs_closest below " << price.vs_closest.n_below_avg << "/"
        << price.vs_closest.n_total << " pd_mean "
        << fmt(price.vs_closest.percent_decrease_mean) << "\n";

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        f << out.str();
    }
    std::cout << out.str();
}

void cmd_features(const std::string& records_path, const std::string& out_dir) {
    auto records = txdata::read_records_file(records_path);
    auto attrs = features::all_user_attributes(records);
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "user_features.csv");
    f << "account";
    for (const auto* name : features::kUserDimNames) f << "," << name;
    f << "\n";
    std::vector<std::string> names;
    for (const auto& [name, v] : attrs) names.push_back(name);
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        f << name;
        for (double v : attrs.at(name)) f << "," << fmt(v);
        f << "\n";
    }
    std::cout << "users " << names.size() << "\n";
}

void cmd_graphs(const std::string& records_path, const std::string& out_dir) {
    auto records = txdata::read_records_file(records_path);
    auto attrs = features::all_user_attributes(records);
    auto eps = measure::episodes(records, max_timestamp(records));
    auto nft = graphs::build_nft_user_graph(eps, records);
    auto user = graphs::build_user_graph(records, attrs);
    fs::create_directories(out_dir);
    graphs::write_nft_user_graph_csv(nft, out_dir);
    graphs::write_user_graph_csv(user, out_dir);
    std::cout << "nft_user nodes " << nft.users.size() << "+" << nft.nfts.size() << " edges "
              << nft.edges.size() << "; user nodes " << user.users.size() << " edges "
              << user.edges.size() << "\n";
}

int cmd_run(const std::string& config_path, int64_t seed, const std::string& out_dir,
            const std::map<std::string, std::string>& overrides) {
    auto kv = load_config(config_path);
    if (seed >= 0) kv.set("seed", std::to_string(seed));
    for (const auto& [k, v] : overrides) kv.set(k, v);
    auto cfg = harness::PipelineConfig::from_kv(kv);
    auto result = harness::run_pipeline(cfg, out_dir);
    std::ifstream sum(result.summary_txt);
    std::cout << sum.rdbuf();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NFT drainer detection pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand name

    std::string config_path, out_dir = "out";
    int64_t seed = -1;
    app.add_option("--config", config_path, "key=value config file")->capture_default_str();
    app.add_option("--seed", seed, "override config seed");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    auto* c_synth = app.add_subcommand("synth", "generate a synthetic NFT ecosystem");

    std::string in_path, marketplaces_path, records_path = "out/records.jsonl", labels_path;
    bool lenient = false;
    auto* c_ingest = app.add_subcommand("ingest", "parse transfer events and classify them");
    c_ingest->add_option("--in", in_path, "transfer-event JSONL")->required();
    c_ingest->add_option("--marketplaces", marketplaces_path, "marketplace account list");
    c_ingest->add_option("--records-out", records_path, "classified records output");
    c_ingest->add_flag("--lenient", lenient, "skip malformed lines instead of aborting");
    c_ingest->add_flag("!--strict", lenient, "abort on the first malformed line (default)");

    auto* c_measure = app.add_subcommand("measure", "drainer behaviour analytics");
    c_measure->add_option("--records", records_path, "classified records JSONL")->required();
    c_measure->add_option("--labels", labels_path, "account labels CSV")->required();
    std::string measure_out;
    c_measure->add_option("--report", measure_out, "also write the report to this file");

    auto* c_features = app.add_subcommand("features", "dump per-user feature vectors");
    c_features->add_option("--records", records_path, "classified records JSONL")->required();

    auto* c_graphs = app.add_subcommand("graphs", "build and dump the two graphs");
    c_graphs->add_option("--records", records_path, "classified records JSONL")->required();

    auto* c_run = app.add_subcommand("run", "full pipeline: data, training, evaluation");
    auto* c_train = app.add_subcommand("train", "train extractors + SVM, save checkpoints");
    auto* c_eval = app.add_subcommand("evaluate", "alias of run");

    int attack_num = 4;
    double attack_level = 50.0, attack_pay = 60.0;
    auto* c_attack = app.add_subcommand("attack", "run pipeline with an evasion attack");
    c_attack->add_option("--attack", attack_num, "attack number 1..4")->capture_default_str();
    c_attack->add_option("--level", attack_level, "attack level L percent")->capture_default_str();
    c_attack->add_option("--pay-pct", attack_pay, "victim payment percent X")
        ->capture_default_str();
    auto* c_defend = app.add_subcommand("defend", "attack + SVM retraining defense");
    c_defend->add_option("--attack", attack_num, "attack number 1..4")->capture_default_str();
    c_defend->add_option("--level", attack_level, "attack level L percent")->capture_default_str();
    c_defend->add_option("--pay-pct", attack_pay, "victim payment percent X")
        ->capture_default_str();

    auto* c_report = app.add_subcommand("report", "print reports from a finished run");

    try {
        app.parse(argc, argv);

        if (c_synth->parsed()) {
            cmd_synth(config_path, seed, out_dir);
        } else if (c_ingest->parsed()) {
            cmd_ingest(in_path, marketplaces_path, records_path, lenient);
        } else if (c_measure->parsed()) {
            cmd_measure(records_path, labels_path, measure_out);
        } else if (c_features->parsed()) {
            cmd_features(records_path, out_dir);
        } else if (c_graphs->parsed()) {
            cmd_graphs(records_path, out_dir);
        } else if (c_run->parsed() || c_eval->parsed()) {
            return cmd_run(config_path, seed, out_dir, {});
        } else if (c_train->parsed()) {
            return cmd_run(config_path, seed, out_dir,
                           {{"n_eval_seeds", "0"}, {"write_artifacts", "true"}});
        } else if (c_attack->parsed() || c_defend->parsed()) {
            std::map<std::string, std::string> overrides{
                {"attack", std::to_string(attack_num)},
                {"attack_level", std::to_string(attack_level)},
                {"attack_pay_pct", std::to_string(attack_pay)},
            };
            if (c_defend->parsed()) overrides["defend"] = "true";
            return cmd_run(config_path, seed, out_dir, overrides);
        } else if (c_report->parsed()) {
            for (const char* name : {"summary.txt", "report.csv"}) {
                std::ifstream f(fs::path(out_dir) / name);
                if (f) std::cout << "== " << name << " ==\n" << f.rdbuf();
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const TrainError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
