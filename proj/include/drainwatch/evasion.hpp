#pragma once

#include <unordered_set>
#include <vector>

#include "drainwatch/txdata.hpp"

namespace drainwatch::evasion {

using txdata::TransactionRecord;
using AccountSet = std::unordered_set<std::string>;

enum class AttackKind { MINT, TIMESPAN, PAY_VICTIM, COMBO };

struct AttackSpec {
    AttackKind kind = AttackKind::MINT;
    double level_pct = 50.0;    // L
    double pay_pct = 10.0;      // X, percent of the NFT's average sale price
    uint64_t seed = 0;

    void validate() const;
};

AttackSpec attack_from_number(int attack_number, double level, double pay_pct, uint64_t seed);

struct AuditRow {
    std::string drainer;
    int records_added = 0;
    int records_converted = 0;
};

struct AttackResult {
    std::vector<TransactionRecord> records;
    std::vector<AuditRow> audit;
    int drainers_skipped = 0;  // PAY_VICTIM with no gift-ins
};

// Transforms only drainer records (plus the payment conversions they imply);
// output is re-sorted by timestamp. Deterministic per seed.
AttackResult apply_attack(const std::vector<TransactionRecord>& records,
                          const AccountSet& drainer_accounts, const AttackSpec& spec);

void write_audit_csv(const std::string& path, const std::vector<AuditRow>& audit);

// Seeded sample of round(fraction * n) attacked accounts for SVM retraining;
// the rest are reserved for evaluation.
void split_defense_sample(const std::vector<std::string>& attacked_accounts, double fraction,
                          uint64_t seed, std::vector<std::string>& retrain,
                          std::vector<std::string>& eval);

}  // namespace drainwatch::evasion
