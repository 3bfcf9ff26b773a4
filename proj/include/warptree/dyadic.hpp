#pragma once

// Dyadic indices (j,k), proper subtrees of the binary master tree on [0,1],
// and the partitions formed by their outer leaves.

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace warptree {

struct DyadicIndex {
    int j = 0;          // level, >= -1; j == -1 is the scaling index
    std::int64_t k = 0; // position, 0 <= k < 2^max(j,0)

    friend auto operator<=>(const DyadicIndex&, const DyadicIndex&) = default;
    friend bool operator==(const DyadicIndex&, const DyadicIndex&) = default;
};

inline constexpr DyadicIndex kScalingIndex{-1, 0};
inline constexpr DyadicIndex kRootIndex{0, 0};
inline constexpr int kMaxLevel = 60;

bool is_valid(const DyadicIndex& ix) noexcept;
void require_valid(const DyadicIndex& ix);
std::string to_string(const DyadicIndex& ix);

/// Closed-open interval [lo, hi) / 2^level with integer endpoints.
struct DyadicInterval {
    std::int64_t lo = 0;
    std::int64_t hi = 1;
    int level = 0;

    double left() const;
    double right() const;
    double length() const;
};

DyadicInterval interval(const DyadicIndex& ix);

/// Cell of level j containing x in [0,1]; x == 1 falls into the last cell.
std::int64_t cell_of(double x, int j);

/// True when I_{inner} is contained in I_{outer} (including equality).
bool contains(const DyadicIndex& outer, const DyadicIndex& inner);

DyadicIndex parent(const DyadicIndex& ix);
std::pair<DyadicIndex, DyadicIndex> children(const DyadicIndex& ix);

using IndexSet = std::set<DyadicIndex>;

/// A proper subtree of the master tree: contains the root when nonempty and
/// is closed under taking parents. Immutable once built.
class DyadicTree {
public:
    DyadicTree() = default;
    /// Throws Error{improper_tree} unless `nodes` is proper.
    explicit DyadicTree(IndexSet nodes);

    const IndexSet& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    bool contains(const DyadicIndex& ix) const { return nodes_.count(ix) != 0; }
    /// Deepest level present, -1 for the empty tree.
    int depth() const noexcept;

    friend bool operator==(const DyadicTree&, const DyadicTree&) = default;

private:
    IndexSet nodes_;
};

bool is_proper(const IndexSet& nodes);

/// Outer leaves of a proper tree. Sorted by (j,k).
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<DyadicIndex> leaves);

    const std::vector<DyadicIndex>& leaves() const noexcept { return leaves_; }
    std::size_t size() const noexcept { return leaves_.size(); }

    /// Exact check that the leaf intervals are disjoint and cover [0,1].
    bool tiles_unit_interval() const;
    /// Leaf whose interval contains x (last leaf is right-closed).
    const DyadicIndex& leaf_containing(double x) const;

private:
    std::vector<DyadicIndex> leaves_;
    std::vector<DyadicIndex> by_position_;  // sorted by left endpoint
};

DyadicTree complete_to_tree(const IndexSet& selected);
/// Empty tree maps to the single-cell partition {(0,0)}.
Partition outer_leaves(const DyadicTree& tree);
/// All nodes with level < levels; its partition has 2^levels cells.
DyadicTree uniform_tree(int levels);

nlohmann::json tree_to_json(const DyadicTree& tree);
DyadicTree tree_from_json(const nlohmann::json& doc);

}  // namespace warptree
