#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "drainwatch/common.hpp"

namespace drainwatch::txdata {

enum class TokenKind { NFT, FT, ETHER };

// One raw token-movement log entry (NFT or fungible) or an external payment,
// grouped with its siblings by tx_hash.
struct TransferEvent {
    std::string tx_hash;
    int64_t log_index = 0;
    TokenKind token_kind = TokenKind::NFT;
    std::string contract;
    std::string token_id;  // empty for FT/ETHER
    std::string from;
    std::string to;
    double amount = 0.0;  // Ether-denominated for FT/ETHER, 1 for NFT
    int64_t timestamp = 0;
};

enum class TxKind { MINT, SALE, GIFT, BURN };

const char* tx_kind_name(TxKind k);
TxKind tx_kind_from_name(const std::string& s);

// A classified NFT ownership change.
struct TransactionRecord {
    std::string contract;
    std::string token_id;
    std::string from;
    std::string to;
    TxKind kind = TxKind::GIFT;
    double price_eth = 0.0;  // 0 for GIFT/MINT/BURN
    int64_t timestamp = 0;
    std::string tx_hash;

    std::string token() const { return contract + "/" + token_id; }
};

struct Payment {
    std::string payer;
    std::string payee;
    double amount_eth = 0.0;
    bool via_marketplace = false;
};

// tx_hash -> Ether/FT value flows inside that transaction.
using PaymentIndex = std::unordered_map<std::string, std::vector<Payment>>;

struct ParseOptions {
    bool lenient = false;  // skip malformed lines instead of aborting
    std::string null_account = kNullAccount;
};

struct ParseResult {
    std::vector<TransferEvent> events;
    int64_t skipped = 0;  // lenient mode only
};

// JSONL, one TransferEvent per line. Strict mode throws DataError naming the
// first offending line; lenient mode counts and skips.
ParseResult parse_transfer_events(std::istream& in, const ParseOptions& opts = {});
ParseResult parse_transfer_events_file(const std::string& path, const ParseOptions& opts = {});

void write_records_jsonl(std::ostream& out, const std::vector<TransactionRecord>& records);
std::vector<TransactionRecord> read_records_jsonl(std::istream& in);
std::vector<TransactionRecord> read_records_file(const std::string& path);
void write_records_file(const std::string& path, const std::vector<TransactionRecord>& records);
void write_events_jsonl(std::ostream& out, const std::vector<TransferEvent>& events);

std::unordered_set<std::string> read_account_list(const std::string& path);

// Payments routed through a marketplace account are flattened to
// (ultimate payer, ultimate payee, net amount, via_marketplace=true).
PaymentIndex build_payment_index(const std::vector<TransferEvent>& events,
                                 const std::unordered_set<std::string>& marketplace_accounts);

TransactionRecord classify_transfer(const TransferEvent& nft_event, const PaymentIndex& index,
                                    const std::string& null_account = kNullAccount);

// Classify all NFT events in one pass; output sorted by (timestamp, tx_hash, log order).
std::vector<TransactionRecord> classify_all(const std::vector<TransferEvent>& events,
                                            const std::unordered_set<std::string>& marketplace_accounts,
                                            const std::string& null_account = kNullAccount);

}  // namespace drainwatch::txdata
