#include "drainwatch/txdata.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace drainwatch::txdata {

using nlohmann::json;

const char* tx_kind_name(TxKind k) {
    switch (k) {
        case TxKind::MINT: return "mint";
        case TxKind::SALE: return "sale";
        case TxKind::GIFT: return "gift";
        case TxKind::BURN: return "burn";
    }
    return "?";
}

TxKind tx_kind_from_name(const std::string& s) {
    if (s == "mint") return TxKind::MINT;
    if (s == "sale") return TxKind::SALE;
    if (s == "gift") return TxKind::GIFT;
    if (s == "burn") return TxKind::BURN;
    throw DataError("unknown transaction kind: " + s);
}

namespace {

TokenKind token_kind_from_name(const std::string& s) {
    if (s == "NFT") return TokenKind::NFT;
    if (s == "FT") return TokenKind::FT;
    if (s == "ETHER") return TokenKind::ETHER;
    throw DataError("unknown token_kind: " + s);
}

const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::NFT: return "NFT";
        case TokenKind::FT: return "FT";
        case TokenKind::ETHER: return "ETHER";
    }
    return "?";
}

TransferEvent event_from_json(const json& j) {
    TransferEvent e;
    e.tx_hash = j.at("tx_hash").get<std::string>();
    e.log_index = j.at("log_index").get<int64_t>();
    e.token_kind = token_kind_from_name(j.at("token_kind").get<std::string>());
    e.contract = j.at("contract").get<std::string>();
    if (j.contains("token_id") && !j.at("token_id").is_null())
        e.token_id = j.at("token_id").get<std::string>();
    e.from = j.at("from").get<std::string>();
    e.to = j.at("to").get<std::string>();
    e.amount = j.at("amount").get<double>();
    e.timestamp = j.at("timestamp").get<int64_t>();
    if (e.amount < 0) throw DataError("negative amount");
    if (e.token_kind == TokenKind::NFT && e.token_id.empty())
        throw DataError("NFT event missing token_id");
    return e;
}

}  // namespace

ParseResult parse_transfer_events(std::istream& in, const ParseOptions& opts) {
    ParseResult out;
    std::string line;
    int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            out.events.push_back(event_from_json(j));
        } catch (const std::exception& ex) {
            if (opts.lenient) {
                ++out.skipped;
                continue;
            }
            throw DataError("malformed record at line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

ParseResult parse_transfer_events_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_transfer_events(in, opts);
}

void write_events_jsonl(std::ostream& out, const std::vector<TransferEvent>& events) {
    for (const auto& e : events) {
        json j;
        j["tx_hash"] = e.tx_hash;
        j["log_index"] = e.log_index;
        j["token_kind"] = token_kind_name(e.token_kind);
        j["contract"] = e.contract;
        j["token_id"] = e.token_id;
        j["from"] = e.from;
        j["to"] = e.to;
        j["amount"] = e.amount;
        j["timestamp"] = e.timestamp;
        out << j.dump() << "\n";
    }
}

void write_records_jsonl(std::ostream& out, const std::vector<TransactionRecord>& records) {
    for (const auto& r : records) {
        json j;
        j["contract"] = r.contract;
        j["token_id"] = r.token_id;
        j["from"] = r.from;
        j["to"] = r.to;
        j["kind"] = tx_kind_name(r.kind);
        j["price_eth"] = r.price_eth;
        j["timestamp"] = r.timestamp;
        j["tx_hash"] = r.tx_hash;
        out << j.dump() << "\n";
    }
}

std::vector<TransactionRecord> read_records_jsonl(std::istream& in) {
    std::vector<TransactionRecord> out;
    std::string line;
    int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            TransactionRecord r;
            r.contract = j.at("contract").get<std::string>();
            r.token_id = j.at("token_id").get<std::string>();
            r.from = j.at("from").get<std::string>();
            r.to = j.at("to").get<std::string>();
            r.kind = tx_kind_from_name(j.at("kind").get<std::string>());
            r.price_eth = j.at("price_eth").get<double>();
            r.timestamp = j.at("timestamp").get<int64_t>();
            r.tx_hash = j.at("tx_hash").get<std::string>();
            out.push_back(std::move(r));
        } catch (const std::exception& ex) {
            throw DataError("malformed record at line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

std::vector<TransactionRecord> read_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_records_jsonl(in);
}

void write_records_file(const std::string& path, const std::vector<TransactionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_records_jsonl(out, records);
}

std::unordered_set<std::string> read_account_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) out.insert(line);
    }
    return out;
}

PaymentIndex build_payment_index(const std::vector<TransferEvent>& events,
                                 const std::unordered_set<std::string>& marketplace_accounts) {
    // Group ETHER/FT events per tx, in log order.
    std::unordered_map<std::string, std::vector<const TransferEvent*>> by_tx;
    for (const auto& e : events) {
        if (e.token_kind == TokenKind::NFT) continue;
        by_tx[e.tx_hash].push_back(&e);
    }
    PaymentIndex index;
    for (auto& [tx, evs] : by_tx) {
        std::sort(evs.begin(), evs.end(), [](const TransferEvent* a, const TransferEvent* b) {
            return a->log_index < b->log_index;
        });
        std::vector<Payment> raw;
        raw.reserve(evs.size());
        for (const auto* e : evs) raw.push_back({e->from, e->to, e->amount, false});

        // Flatten marketplace hops: a payment into a marketplace account paired
        // with the next unconsumed payment out of it becomes one net payment
        // from the ultimate payer to the ultimate payee.
        std::vector<bool> consumed(raw.size(), false);
        std::vector<Payment> flat;
        for (size_t i = 0; i < raw.size(); ++i) {
            if (consumed[i]) continue;
            if (marketplace_accounts.count(raw[i].payee)) {
                const std::string& mkt = raw[i].payee;
                for (size_t j = 0; j < raw.size(); ++j) {
                    if (j == i || consumed[j]) continue;
                    if (raw[j].payer == mkt) {
                        flat.push_back({raw[i].payer, raw[j].payee, raw[j].amount_eth, true});
                        consumed[i] = consumed[j] = true;
                        break;
                    }
                }
                if (consumed[i]) continue;
            }
            flat.push_back(raw[i]);
            consumed[i] = true;
        }
        index.emplace(tx, std::move(flat));
    }
    return index;
}

TransactionRecord classify_transfer(const TransferEvent& nft_event, const PaymentIndex& index,
                                    const std::string& null_account) {
    if (nft_event.token_kind != TokenKind::NFT)
        throw DataError("classify_transfer expects an NFT event");
    TransactionRecord r;
    r.contract = nft_event.contract;
    r.token_id = nft_event.token_id;
    r.from = nft_event.from;
    r.to = nft_event.to;
    r.timestamp = nft_event.timestamp;
    r.tx_hash = nft_event.tx_hash;
    if (nft_event.from == null_account) {
        r.kind = TxKind::MINT;
        return r;
    }
    if (nft_event.to == null_account) {
        r.kind = TxKind::BURN;
        return r;
    }
    double paid = 0.0;
    auto it = index.find(nft_event.tx_hash);
    if (it != index.end()) {
        for (const auto& p : it->second)
            if (p.payer == nft_event.to && p.payee == nft_event.from) paid += p.amount_eth;
    }
    if (paid > 0) {
        r.kind = TxKind::SALE;
        r.price_eth = paid;
    } else {
        r.kind = TxKind::GIFT;
    }
    return r;
}

std::vector<TransactionRecord> classify_all(const std::vector<TransferEvent>& events,
                                            const std::unordered_set<std::string>& marketplace_accounts,
                                            const std::string& null_account) {
    PaymentIndex index = build_payment_index(events, marketplace_accounts);
    std::vector<TransactionRecord> out;
    std::vector<size_t> order;
    for (size_t i = 0; i < events.size(); ++i)
        if (events[i].token_kind == TokenKind::NFT) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (events[a].timestamp != events[b].timestamp) return events[a].timestamp < events[b].timestamp;
        if (events[a].tx_hash != events[b].tx_hash) return events[a].tx_hash < events[b].tx_hash;
        return events[a].log_index < events[b].log_index;
    });
    out.reserve(order.size());
    for (size_t i : order) out.push_back(classify_transfer(events[i], index, null_account));
    return out;
}

}  // namespace drainwatch::txdata
