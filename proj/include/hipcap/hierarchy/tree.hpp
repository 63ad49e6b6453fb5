#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hipcap/hierarchy/box.hpp"

namespace hipcap {

enum class NodeKind { Root, Region, Instance };

struct TreeNode {
    NodeKind kind = NodeKind::Root;
    std::size_t region = 0;  // meaningful for Region and Instance nodes
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
};

/// Image -> nested regions -> instance leaves.
///
/// Node 0 is the root. Region nodes follow in insertion order (descending
/// area), then one instance leaf per region node in the same order, so a
/// tree over K regions always has 2K + 1 nodes.
class HierarchyTree {
public:
    static constexpr std::size_t kRoot = 0;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t region_count() const noexcept { return region_node_.size(); }
    std::size_t edge_count() const noexcept { return nodes_.empty() ? 0 : nodes_.size() - 1; }

    std::size_t region_node(std::size_t region) const { return region_node_.at(region); }
    std::size_t instance_node(std::size_t region) const { return instance_node_.at(region); }

    /// For each region index, the region index of its parent region node, or
    /// -1 when the parent is the root.
    std::vector<long> parent_array() const;

    /// Longest root-to-leaf path in edges; 0 for a root-only tree, 2 for a star.
    std::size_t depth() const;

    /// Node ids ordered so that every child precedes its parent.
    std::vector<std::size_t> bottom_up_order() const;

    /// Throws StateError describing the first violated structural invariant.
    void validate() const;

private:
    friend HierarchyTree build_tree(std::span<const Region> regions, double epsilon);
    friend HierarchyTree tree_from_parents(std::span<const long> parent_region, std::span<const std::size_t> insertion_order);

    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> region_node_;
    std::vector<std::size_t> instance_node_;
};

/// Builds the hierarchy: regions are visited by descending area (ties by
/// ascending index); each one becomes a child of the existing region node
/// with the largest IoU if that IoU exceeds `epsilon` (ties go to the
/// earliest-inserted node), otherwise a child of the root. Every region node
/// then receives its instance leaf.
///
/// Region indices must be a permutation of [0, K); epsilon must lie in [0, 1).
HierarchyTree build_tree(std::span<const Region> regions, double epsilon);

/// Rebuilds a tree from a parent array (see parent_array()) and the order in
/// which region nodes were inserted. Used to construct hand-shaped trees.
HierarchyTree tree_from_parents(std::span<const long> parent_region, std::span<const std::size_t> insertion_order);

/// Deterministic Graphviz digraph with one node per tree node.
std::string tree_to_dot(const HierarchyTree& tree, std::span<const Region> regions);

/// JSON dump: {"format","version","nodes":[{id,kind,region,parent,children}]}.
std::string tree_to_json(const HierarchyTree& tree);

}  // namespace hipcap
