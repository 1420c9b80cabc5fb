#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "drainwatch/graphs.hpp"

using namespace drainwatch;
using namespace drainwatch::graphs;
using txdata::TransactionRecord;
using txdata::TxKind;

namespace {

constexpr int64_t kDay = 86400;

TransactionRecord rec(std::string token_id, std::string from, std::string to, TxKind kind,
                      double price, int64_t ts) {
    return TransactionRecord{"c", std::move(token_id), std::move(from), std::move(to),
                             kind,  price,              ts,              "tx" + std::to_string(ts)};
}

}  // namespace

TEST_CASE("bipartite graph has one edge per episode, including re-acquisitions") {
    // a owns token 1 twice: mint -> gift out -> gift back.
    std::vector<TransactionRecord> records{
        rec("1", kNullAccount, "a", TxKind::MINT, 0, 0),
        rec("1", "a", "b", TxKind::GIFT, 0, kDay),
        rec("1", "b", "a", TxKind::GIFT, 0, 2 * kDay),
    };
    auto eps = measure::episodes(records, 5 * kDay);
    NftUserGraph g = build_nft_user_graph(eps, records);
    CHECK(g.users.size() == 2);
    CHECK(g.nfts.size() == 1);
    CHECK(g.edges.size() == 3);  // parallel edges for a's two tenures
    CHECK(g.is_bipartite_consistent());
    int a = g.user_index.at("a");
    CHECK(g.user_edges[a].size() == 2);
    CHECK(g.nft_edges[g.nft_index.at("c/1")].size() == 3);
}

TEST_CASE("user graph types edges by relation and collapses duplicates") {
    std::vector<TransactionRecord> records{
        rec("1", "a", "b", TxKind::SALE, 1.0, 0),
        rec("2", "b", "a", TxKind::SALE, 1.0, kDay),  // same pair, same relation
        rec("3", "a", "b", TxKind::GIFT, 0, 2 * kDay),
        rec("4", "a", "a", TxKind::GIFT, 0, 3 * kDay),  // self-loop dropped
        rec("5", kNullAccount, "a", TxKind::MINT, 0, 4 * kDay),  // no user edge
    };
    auto attrs = features::all_user_attributes(records);
    UserGraph g = build_user_graph(records, attrs);
    CHECK(g.users.size() == attrs.size());
    REQUIRE(g.edges.size() == 2);
    int sale = g.edges[0].rel == Relation::SALE ? 0 : 1;
    CHECK(g.edges[sale].multiplicity == 2);
    CHECK(g.edges[1 - sale].rel == Relation::GIFT);
    CHECK(g.edges[1 - sale].multiplicity == 1);
    CHECK(g.total_multiplicity() == 3);
    // adjacency is symmetric per relation
    int a = g.user_index.at("a"), b = g.user_index.at("b");
    CHECK(g.adj_sale[a].size() == 1);
    CHECK(g.adj_sale[b].size() == 1);
    CHECK(g.adj_gift[a].size() == 1);
}

TEST_CASE("isolated users still carry their attributes") {
    std::vector<TransactionRecord> records{
        rec("1", kNullAccount, "solo", TxKind::MINT, 0, 0),
        rec("2", "a", "b", TxKind::GIFT, 0, kDay),
    };
    auto attrs = features::all_user_attributes(records);
    UserGraph g = build_user_graph(records, attrs);
    REQUIRE(g.user_index.count("solo") == 1);
    int solo = g.user_index.at("solo");
    CHECK(g.attrs[solo][3] == 1);  // one mint
    CHECK(g.adj_sale[solo].empty());
    CHECK(g.adj_gift[solo].empty());
}

TEST_CASE("2-hop subgraph selection on a path graph") {
    // path: u0 -s- u1 -g- u2 -s- u3 -s- u4
    std::vector<TransactionRecord> records{
        rec("1", "u0", "u1", TxKind::SALE, 1.0, 0),
        rec("2", "u1", "u2", TxKind::GIFT, 0, kDay),
        rec("3", "u2", "u3", TxKind::SALE, 1.0, 2 * kDay),
        rec("4", "u3", "u4", TxKind::SALE, 1.0, 3 * kDay),
    };
    auto attrs = features::all_user_attributes(records);
    UserGraph g = build_user_graph(records, attrs);
    SubgraphSelection sel = select_evaluation_subgraph(g, {"u0"}, 2);
    CHECK(sel.central_users == std::unordered_set<std::string>{"u0"});
    CHECK(sel.included_users.count("u0") == 1);
    CHECK(sel.included_users.count("u1") == 1);
    CHECK(sel.included_users.count("u2") == 1);
    CHECK(sel.included_users.count("u3") == 0);  // 3 hops away
    CHECK(sel.included_users.count("u4") == 0);

    CHECK_THROWS_AS(select_evaluation_subgraph(g, {"ghost"}, 2), DataError);
}

TEST_CASE("neighbor cap keeps a seeded sample on hot NFT nodes only") {
    // One token owned by 10 users in sequence; one user owning 3 tokens.
    std::vector<TransactionRecord> records;
    records.push_back(rec("hot", kNullAccount, "h0", TxKind::MINT, 0, 0));
    for (int i = 1; i < 10; ++i)
        records.push_back(rec("hot", "h" + std::to_string(i - 1), "h" + std::to_string(i),
                              TxKind::GIFT, 0, i * kDay));
    for (int t = 0; t < 3; ++t)
        records.push_back(rec("t" + std::to_string(t), kNullAccount, "collector", TxKind::MINT, 0,
                              (20 + t) * kDay));
    auto eps = measure::episodes(records, 40 * kDay);
    NftUserGraph g = build_nft_user_graph(eps, records);
    REQUIRE(g.nft_edges[g.nft_index.at("c/hot")].size() == 10);

    NftUserGraph capped = cap_neighbors(g, 4, 7);
    CHECK(capped.nft_edges[capped.nft_index.at("c/hot")].size() == 4);
    // user-side degree is not capped
    CHECK(capped.user_edges[capped.user_index.at("collector")].size() == 3);
    CHECK(capped.is_bipartite_consistent());

    // deterministic for a fixed seed
    NftUserGraph again = cap_neighbors(g, 4, 7);
    REQUIRE(again.edges.size() == capped.edges.size());
    for (size_t i = 0; i < capped.edges.size(); ++i) {
        CHECK(again.edges[i].user == capped.edges[i].user);
        CHECK(again.edges[i].nft == capped.edges[i].nft);
    }

    CHECK_THROWS_AS(cap_neighbors(g, 0, 7), DataError);
}

TEST_CASE("nodes below the cap are untouched") {
    std::vector<TransactionRecord> records{
        rec("1", kNullAccount, "a", TxKind::MINT, 0, 0),
        rec("1", "a", "b", TxKind::GIFT, 0, kDay),
    };
    auto eps = measure::episodes(records, 5 * kDay);
    NftUserGraph g = build_nft_user_graph(eps, records);
    NftUserGraph capped = cap_neighbors(g, 64, 0);
    CHECK(capped.edges.size() == g.edges.size());
}
