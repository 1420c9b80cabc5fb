#include "drainwatch/evasion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace drainwatch::evasion {

using txdata::TxKind;

void AttackSpec::validate() const {
    if (level_pct <= 0.0) throw UsageError("attack level must be positive");
    if (kind == AttackKind::PAY_VICTIM || kind == AttackKind::COMBO) {
        if (pay_pct <= 0.0 || pay_pct > 60.0)
            throw UsageError("pay-pct must be in (0, 60]");
    }
}

AttackSpec attack_from_number(int attack_number, double level, double pay_pct, uint64_t seed) {
    AttackSpec spec;
    switch (attack_number) {
        case 1: spec.kind = AttackKind::MINT; break;
        case 2: spec.kind = AttackKind::TIMESPAN; break;
        case 3: spec.kind = AttackKind::PAY_VICTIM; break;
        case 4: spec.kind = AttackKind::COMBO; break;
        default: throw UsageError("attack number must be 1..4");
    }
    spec.level_pct = level;
    spec.pay_pct = pay_pct;
    spec.seed = seed;
    return spec;
}

namespace {

struct DrainerView {
    std::vector<size_t> gift_in_idx;  // records where the drainer is the gift recipient
    int64_t first_ts = 0;
    int64_t last_ts = 0;
    bool seen = false;
};

std::map<std::string, DrainerView> index_drainers(const std::vector<TransactionRecord>& records,
                                                  const AccountSet& drainers) {
    std::map<std::string, DrainerView> views;
    for (const auto& d : drainers) views[d];  // keep skipped drainers visible in the audit
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        for (const std::string* who : {&r.from, &r.to}) {
            auto it = views.find(*who);
            if (it == views.end()) continue;
            auto& v = it->second;
            if (!v.seen || r.timestamp < v.first_ts) v.first_ts = r.timestamp;
            if (!v.seen || r.timestamp > v.last_ts) v.last_ts = r.timestamp;
            v.seen = true;
        }
        if (r.kind == TxKind::GIFT && drainers.count(r.to))
            views[r.to].gift_in_idx.push_back(i);
    }
    return views;
}

void attack_mint(std::vector<TransactionRecord>& records, const AccountSet& drainers,
                 double level_pct, Rng& rng, std::map<std::string, AuditRow>& audit) {
    auto views = index_drainers(records, drainers);
    for (auto& [name, v] : views) {
        if (!v.seen || v.gift_in_idx.empty()) continue;
        int n_new = static_cast<int>(
            std::ceil(level_pct / 100.0 * static_cast<double>(v.gift_in_idx.size())));
        for (int i = 0; i < n_new; ++i) {
            TransactionRecord r;
            r.contract = "0xattackmint";
            r.token_id = name + "_" + std::to_string(i);
            r.from = kNullAccount;
            r.to = name;
            r.kind = TxKind::MINT;
            r.timestamp = v.first_ts +
                          static_cast<int64_t>(uniform(rng, 0.0, 1.0) *
                                               static_cast<double>(v.last_ts - v.first_ts));
            r.tx_hash = "0xatkmint_" + name + "_" + std::to_string(i);
            records.push_back(r);
            audit[name].records_added += 1;
        }
    }
}

void attack_timespan(std::vector<TransactionRecord>& records, const AccountSet& drainers,
                     double level_pct, std::map<std::string, AuditRow>& audit) {
    auto views = index_drainers(records, drainers);
    for (auto& [name, v] : views) {
        if (!v.seen) continue;
        int64_t span = v.last_ts - v.first_ts;
        int64_t delta = std::llround(level_pct / 100.0 * static_cast<double>(span));
        TransactionRecord r;
        r.contract = "0xattackspan";
        r.token_id = name;
        r.from = kNullAccount;
        r.to = name;
        r.kind = TxKind::MINT;
        r.timestamp = v.first_ts - delta;
        r.tx_hash = "0xatkspan_" + name;
        records.push_back(r);
        audit[name].records_added += 1;
    }
}

void attack_pay_victim(std::vector<TransactionRecord>& records, const AccountSet& drainers,
                       double level_pct, double pay_pct, Rng& rng,
                       std::map<std::string, AuditRow>& audit, int& skipped) {
    // average sale price per token, with a global fallback for never-sold tokens
    std::unordered_map<std::string, std::pair<double, int>> token_sales;
    double global_sum = 0.0;
    int global_n = 0;
    for (const auto& r : records) {
        if (r.kind != TxKind::SALE) continue;
        auto& agg = token_sales[r.token()];
        agg.first += r.price_eth;
        agg.second += 1;
        global_sum += r.price_eth;
        global_n += 1;
    }
    double global_avg = global_n > 0 ? global_sum / global_n : 1.0;

    auto views = index_drainers(records, drainers);
    for (auto& [name, v] : views) {
        if (!v.seen) continue;
        if (v.gift_in_idx.empty()) {
            skipped += 1;
            continue;
        }
        auto idx = v.gift_in_idx;
        std::shuffle(idx.begin(), idx.end(), rng);
        int k = static_cast<int>(
            std::ceil(level_pct / 100.0 * static_cast<double>(idx.size())));
        k = std::min<int>(k, static_cast<int>(idx.size()));
        for (int i = 0; i < k; ++i) {
            auto& r = records[idx[i]];
            auto it = token_sales.find(r.token());
            double avg = (it != token_sales.end() && it->second.second > 0)
                             ? it->second.first / it->second.second
                             : global_avg;
            r.kind = TxKind::SALE;
            r.price_eth = pay_pct / 100.0 * avg;
            audit[name].records_converted += 1;
        }
    }
}

}  // namespace

AttackResult apply_attack(const std::vector<TransactionRecord>& records,
                          const AccountSet& drainer_accounts, const AttackSpec& spec) {
    spec.validate();
    AttackResult out;
    out.records = records;
    Rng rng(spec.seed);
    std::map<std::string, AuditRow> audit;

    switch (spec.kind) {
        case AttackKind::MINT:
            attack_mint(out.records, drainer_accounts, spec.level_pct, rng, audit);
            break;
        case AttackKind::TIMESPAN:
            attack_timespan(out.records, drainer_accounts, spec.level_pct, audit);
            break;
        case AttackKind::PAY_VICTIM:
            attack_pay_victim(out.records, drainer_accounts, spec.level_pct, spec.pay_pct, rng,
                              audit, out.drainers_skipped);
            break;
        case AttackKind::COMBO:
            attack_pay_victim(out.records, drainer_accounts, spec.level_pct, spec.pay_pct, rng,
                              audit, out.drainers_skipped);
            attack_timespan(out.records, drainer_accounts, 50.0, audit);
            attack_mint(out.records, drainer_accounts, 50.0, rng, audit);
            break;
    }

    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const TransactionRecord& a, const TransactionRecord& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         return a.tx_hash < b.tx_hash;
                     });
    for (auto& [name, row] : audit) {
        row.drainer = name;
        out.audit.push_back(row);
    }
    return out;
}

void write_audit_csv(const std::string& path, const std::vector<AuditRow>& audit) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open audit file: " + path);
    out << "drainer,records_added,records_converted\n";
    for (const auto& row : audit)
        out << row.drainer << "," << row.records_added << "," << row.records_converted << "\n";
}

void split_defense_sample(const std::vector<std::string>& attacked_accounts, double fraction,
                          uint64_t seed, std::vector<std::string>& retrain,
                          std::vector<std::string>& eval) {
    auto n = static_cast<long long>(attacked_accounts.size());
    long long k = std::llround(fraction * static_cast<double>(n));
    if (k <= 0) throw DataError("FractionTooSmall: defense sample rounds to zero accounts");
    std::vector<std::string> pool = attacked_accounts;
    std::sort(pool.begin(), pool.end());
    Rng rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    retrain.assign(pool.begin(), pool.begin() + k);
    eval.assign(pool.begin() + k, pool.end());
}

}  // namespace drainwatch::evasion
