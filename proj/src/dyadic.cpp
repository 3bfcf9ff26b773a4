#include "warptree/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "warptree/error.hpp"

namespace warptree {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::level_underflow: return "level_underflow";
        case ErrorCode::improper_tree: return "improper_tree";
        case ErrorCode::domain: return "domain";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::empty_sample: return "empty_sample";
        case ErrorCode::quadrature: return "quadrature";
        case ErrorCode::missing_coefficient: return "missing_coefficient";
        case ErrorCode::sample_too_small: return "sample_too_small";
        case ErrorCode::catalog: return "catalog";
        case ErrorCode::io: return "io";
        case ErrorCode::parse: return "parse";
        case ErrorCode::interrupted: return "interrupted";
    }
    return "unknown";
}

bool is_valid(const DyadicIndex& ix) noexcept {
    if (ix.j == -1) return ix.k == 0;
    if (ix.j < -1 || ix.j > kMaxLevel) return false;
    return ix.k >= 0 && ix.k < (std::int64_t{1} << ix.j);
}

void require_valid(const DyadicIndex& ix) {
    if (!is_valid(ix)) fail(ErrorCode::invalid_argument, "invalid dyadic index " + to_string(ix));
}

std::string to_string(const DyadicIndex& ix) {
    return "(" + std::to_string(ix.j) + "," + std::to_string(ix.k) + ")";
}

double DyadicInterval::left() const { return std::ldexp(static_cast<double>(lo), -level); }
double DyadicInterval::right() const { return std::ldexp(static_cast<double>(hi), -level); }
double DyadicInterval::length() const { return std::ldexp(static_cast<double>(hi - lo), -level); }

DyadicInterval interval(const DyadicIndex& ix) {
    require_valid(ix);
    if (ix.j < 0) return {0, 1, 0};
    return {ix.k, ix.k + 1, ix.j};
}

std::int64_t cell_of(double x, int j) {
    const std::int64_t cells = std::int64_t{1} << j;
    const auto k = static_cast<std::int64_t>(std::floor(std::ldexp(x, j)));
    return std::clamp<std::int64_t>(k, 0, cells - 1);
}

bool contains(const DyadicIndex& outer, const DyadicIndex& inner) {
    if (outer.j < 0) return true;
    if (inner.j < outer.j) return false;
    return (inner.k >> (inner.j - outer.j)) == outer.k;
}

DyadicIndex parent(const DyadicIndex& ix) {
    if (ix.j <= 0) fail(ErrorCode::level_underflow, "no parent for " + to_string(ix));
    return {ix.j - 1, ix.k / 2};
}

std::pair<DyadicIndex, DyadicIndex> children(const DyadicIndex& ix) {
    if (ix.j < 0) fail(ErrorCode::invalid_argument, "scaling index has no children");
    return {{ix.j + 1, 2 * ix.k}, {ix.j + 1, 2 * ix.k + 1}};
}

bool is_proper(const IndexSet& nodes) {
    if (nodes.empty()) return true;
    if (!nodes.count(kRootIndex)) return false;
    for (const auto& ix : nodes) {
        if (!is_valid(ix) || ix.j < 0) return false;
        if (ix.j >= 1 && !nodes.count(parent(ix))) return false;
    }
    return true;
}

DyadicTree::DyadicTree(IndexSet nodes) : nodes_(std::move(nodes)) {
    if (!is_proper(nodes_)) fail(ErrorCode::improper_tree, "node set is not a proper subtree");
}

int DyadicTree::depth() const noexcept {
    // std::set is ordered by (j,k); the last element has the largest level.
    return nodes_.empty() ? -1 : nodes_.rbegin()->j;
}

DyadicTree complete_to_tree(const IndexSet& selected) {
    IndexSet nodes;
    for (auto ix : selected) {
        require_valid(ix);
        if (ix.j < 0) fail(ErrorCode::invalid_argument, "scaling index cannot enter a tree");
        while (nodes.insert(ix).second && ix.j > 0) ix = parent(ix);
    }
    return DyadicTree(std::move(nodes));
}

Partition outer_leaves(const DyadicTree& tree) {
    if (tree.empty()) return Partition({kRootIndex});
    std::vector<DyadicIndex> leaves;
    for (const auto& ix : tree.nodes()) {
        auto [left, right] = children(ix);
        if (!tree.contains(left)) leaves.push_back(left);
        if (!tree.contains(right)) leaves.push_back(right);
    }
    return Partition(std::move(leaves));
}

DyadicTree uniform_tree(int levels) {
    if (levels < 0 || levels > kMaxLevel) fail(ErrorCode::invalid_argument, "uniform_tree level out of range");
    IndexSet nodes;
    for (int j = 0; j < levels; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) nodes.insert({j, k});
    return DyadicTree(std::move(nodes));
}

Partition::Partition(std::vector<DyadicIndex> leaves) : leaves_(std::move(leaves)) {
    for (const auto& ix : leaves_) {
        require_valid(ix);
        if (ix.j < 0) fail(ErrorCode::invalid_argument, "scaling index cannot be a partition cell");
    }
    std::sort(leaves_.begin(), leaves_.end());
    by_position_ = leaves_;
    std::sort(by_position_.begin(), by_position_.end(), [](const DyadicIndex& a, const DyadicIndex& b) {
        // compare left endpoints a.k/2^a.j and b.k/2^b.j exactly
        const int level = std::max(a.j, b.j);
        return (a.k << (level - a.j)) < (b.k << (level - b.j));
    });
}

bool Partition::tiles_unit_interval() const {
    if (by_position_.empty()) return false;
    int level = 0;
    for (const auto& ix : by_position_) level = std::max(level, ix.j);
    std::int64_t cursor = 0;
    for (const auto& ix : by_position_) {
        const int shift = level - ix.j;
        if ((ix.k << shift) != cursor) return false;
        cursor = (ix.k + 1) << shift;
    }
    return cursor == (std::int64_t{1} << level);
}

const DyadicIndex& Partition::leaf_containing(double x) const {
    if (by_position_.empty()) fail(ErrorCode::invalid_argument, "empty partition");
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::domain, "point outside [0,1]");
    // last leaf whose left endpoint is <= x
    auto it = std::upper_bound(by_position_.begin(), by_position_.end(), x,
                               [](double value, const DyadicIndex& ix) { return value < interval(ix).left(); });
    if (it == by_position_.begin()) return by_position_.front();
    return *std::prev(it);
}

nlohmann::json tree_to_json(const DyadicTree& tree) {
    auto doc = nlohmann::json::array();
    for (const auto& ix : tree.nodes()) doc.push_back({ix.j, ix.k});
    return doc;
}

DyadicTree tree_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) fail(ErrorCode::parse, "tree JSON must be an array of [j,k] pairs");
    IndexSet nodes;
    for (const auto& item : doc) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() || !item[1].is_number_integer())
            fail(ErrorCode::parse, "tree entry must be [j,k]");
        DyadicIndex ix{item[0].get<int>(), item[1].get<std::int64_t>()};
        require_valid(ix);
        nodes.insert(ix);
    }
    return DyadicTree(std::move(nodes));
}

}  // namespace warptree
