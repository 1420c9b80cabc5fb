#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "drainwatch/features.hpp"

namespace drainwatch::graphs {

using features::EdgeVector;
using features::UserVector;
using measure::OwnershipEpisode;
using txdata::TransactionRecord;
using txdata::TxKind;

// Undirected bipartite graph between users and NFTs; one attributed edge per
// ownership episode (re-acquisitions yield parallel edges).
struct NftUserGraph {
    std::vector<std::string> users;  // index = user node id
    std::vector<std::string> nfts;   // index = nft node id
    std::unordered_map<std::string, int> user_index;
    std::unordered_map<std::string, int> nft_index;

    struct Edge {
        int user = 0;
        int nft = 0;
        EdgeVector features{};
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> user_edges;  // edge ids incident to each user
    std::vector<std::vector<int>> nft_edges;   // edge ids incident to each nft

    bool is_bipartite_consistent() const;
};

enum class Relation { SALE, GIFT };

// Relation-typed user graph; duplicate (pair, relation) edges are collapsed
// with a multiplicity count. Self-loops are dropped.
struct UserGraph {
    std::vector<std::string> users;
    std::unordered_map<std::string, int> user_index;
    std::vector<UserVector> attrs;

    struct Edge {
        int a = 0;
        int b = 0;
        Relation rel = Relation::SALE;
        int multiplicity = 1;
    };
    std::vector<Edge> edges;
    // adjacency per relation: user -> list of (neighbor, edge id)
    std::vector<std::vector<std::pair<int, int>>> adj_sale;
    std::vector<std::vector<std::pair<int, int>>> adj_gift;

    int64_t total_multiplicity() const;
};

NftUserGraph build_nft_user_graph(const std::vector<OwnershipEpisode>& episodes,
                                  const std::vector<TransactionRecord>& records);

UserGraph build_user_graph(const std::vector<TransactionRecord>& records,
                           const std::unordered_map<std::string, UserVector>& user_attrs);

struct SubgraphSelection {
    std::unordered_set<std::string> included_users;  // centrals + 1st/2nd hop
    std::unordered_set<std::string> central_users;   // eligible for labels
};

// 2-hop expansion over the user graph; NFTs attached afterwards when the
// caller filters episodes by included users.
SubgraphSelection select_evaluation_subgraph(const UserGraph& graph,
                                             const std::vector<std::string>& central_accounts,
                                             int hops = 2);

// Nodes over the cap keep a uniformly seeded sample of their edges. Applied
// to NFT nodes only (spam collections with thousands of holders).
NftUserGraph cap_neighbors(const NftUserGraph& graph, int max_degree, uint64_t seed);

void write_nft_user_graph_csv(const NftUserGraph& g, const std::string& dir);
void write_user_graph_csv(const UserGraph& g, const std::string& dir);

}  // namespace drainwatch::graphs
