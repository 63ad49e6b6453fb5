#include "hipcap/hierarchy/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hipcap/error.hpp"

namespace hipcap {
namespace {

void check_indices(std::span<const Region> regions) {
    std::vector<bool> seen(regions.size(), false);
    for (std::size_t p = 0; p < regions.size(); ++p) {
        const std::size_t idx = regions[p].index;
        if (idx >= regions.size()) {
            throw InputError("region index " + std::to_string(idx) + " outside [0, " +
                             std::to_string(regions.size()) + ")");
        }
        if (seen[idx]) throw InputError("duplicate region index " + std::to_string(idx));
        seen[idx] = true;
    }
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Root: return "root";
        case NodeKind::Region: return "region";
        case NodeKind::Instance: return "instance";
    }
    return "?";
}

}  // namespace

HierarchyTree build_tree(std::span<const Region> regions, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in [0, 1)");
    check_indices(regions);
    const std::size_t k = regions.size();

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double aa = regions[a].box.area(), ab = regions[b].box.area();
        if (aa != ab) return aa > ab;
        return regions[a].index < regions[b].index;
    });

    HierarchyTree tree;
    tree.nodes_.reserve(2 * k + 1);
    tree.nodes_.push_back(TreeNode{NodeKind::Root, 0, std::nullopt, {}});
    tree.region_node_.assign(k, 0);
    tree.instance_node_.assign(k, 0);

    std::vector<std::size_t> inserted;  // input positions, insertion order
    inserted.reserve(k);
    for (std::size_t pos : order) {
        std::size_t parent = HierarchyTree::kRoot;
        double best = -1.0;
        for (std::size_t n = 0; n < inserted.size(); ++n) {
            const double v = iou(regions[pos].box, regions[inserted[n]].box);
            if (v > best) {
                best = v;
                parent = n + 1;
            }
        }
        if (!(best > epsilon)) parent = HierarchyTree::kRoot;
        const std::size_t id = tree.nodes_.size();
        tree.nodes_.push_back(TreeNode{NodeKind::Region, regions[pos].index, parent, {}});
        tree.nodes_[parent].children.push_back(id);
        tree.region_node_[regions[pos].index] = id;
        inserted.push_back(pos);
    }
    for (std::size_t n = 0; n < inserted.size(); ++n) {
        const std::size_t region_id = n + 1;
        const std::size_t idx = regions[inserted[n]].index;
        const std::size_t id = tree.nodes_.size();
        tree.nodes_.push_back(TreeNode{NodeKind::Instance, idx, region_id, {}});
        tree.nodes_[region_id].children.push_back(id);
        tree.instance_node_[idx] = id;
    }
    return tree;
}

HierarchyTree tree_from_parents(std::span<const long> parent_region, std::span<const std::size_t> insertion_order) {
    const std::size_t k = parent_region.size();
    if (insertion_order.size() != k) throw InputError("insertion order must list every region once");
    HierarchyTree tree;
    tree.nodes_.push_back(TreeNode{NodeKind::Root, 0, std::nullopt, {}});
    tree.region_node_.assign(k, 0);
    tree.instance_node_.assign(k, 0);
    std::vector<bool> placed(k, false);
    for (std::size_t idx : insertion_order) {
        if (idx >= k || placed[idx]) throw InputError("insertion order is not a permutation");
        const long p = parent_region[idx];
        std::size_t parent = HierarchyTree::kRoot;
        if (p >= 0) {
            if (static_cast<std::size_t>(p) >= k || !placed[static_cast<std::size_t>(p)]) {
                throw InputError("parent of region " + std::to_string(idx) + " is not inserted before it");
            }
            parent = tree.region_node_[static_cast<std::size_t>(p)];
        }
        const std::size_t id = tree.nodes_.size();
        tree.nodes_.push_back(TreeNode{NodeKind::Region, idx, parent, {}});
        tree.nodes_[parent].children.push_back(id);
        tree.region_node_[idx] = id;
        placed[idx] = true;
    }
    for (std::size_t idx : insertion_order) {
        const std::size_t region_id = tree.region_node_[idx];
        const std::size_t id = tree.nodes_.size();
        tree.nodes_.push_back(TreeNode{NodeKind::Instance, idx, region_id, {}});
        tree.nodes_[region_id].children.push_back(id);
        tree.instance_node_[idx] = id;
    }
    return tree;
}

std::vector<long> HierarchyTree::parent_array() const {
    std::vector<long> out(region_node_.size(), -1);
    for (std::size_t idx = 0; idx < region_node_.size(); ++idx) {
        const auto& n = nodes_[region_node_[idx]];
        const std::size_t p = *n.parent;
        if (p != kRoot) out[idx] = static_cast<long>(nodes_[p].region);
    }
    return out;
}

std::size_t HierarchyTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    // Parents always precede children in node-id order.
    for (std::size_t id = 1; id < nodes_.size(); ++id) {
        d[id] = d[*nodes_[id].parent] + 1;
        best = std::max(best, d[id]);
    }
    return best;
}

std::vector<std::size_t> HierarchyTree::bottom_up_order() const {
    std::vector<std::size_t> order;
    order.reserve(nodes_.size());
    // Post-order DFS from the root, children in stored order.
    std::vector<std::pair<std::size_t, std::size_t>> stack{{kRoot, 0}};
    while (!stack.empty()) {
        auto& [id, next] = stack.back();
        if (next < nodes_[id].children.size()) {
            const std::size_t child = nodes_[id].children[next++];
            stack.emplace_back(child, 0);
        } else {
            order.push_back(id);
            stack.pop_back();
        }
    }
    return order;
}

void HierarchyTree::validate() const {
    if (nodes_.empty() || nodes_[0].kind != NodeKind::Root || nodes_[0].parent) {
        throw StateError("tree must start with a parentless root");
    }
    const std::size_t k = region_node_.size();
    if (nodes_.size() != 2 * k + 1) throw StateError("tree must have 2K + 1 nodes");
    std::size_t roots = 0;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const auto& n = nodes_[id];
        if (n.kind == NodeKind::Root) ++roots;
        if (id != kRoot) {
            if (!n.parent || *n.parent >= id) throw StateError("node " + std::to_string(id) + " has an invalid parent");
            const auto& p = nodes_[*n.parent];
            if (std::count(p.children.begin(), p.children.end(), id) != 1) {
                throw StateError("node " + std::to_string(id) + " missing from its parent's children");
            }
            if (n.kind == NodeKind::Region && p.kind == NodeKind::Instance) {
                throw StateError("region node under an instance leaf");
            }
            if (n.kind == NodeKind::Instance) {
                if (!n.children.empty()) throw StateError("instance leaf with children");
                if (p.kind != NodeKind::Region || p.region != n.region) {
                    throw StateError("instance leaf not attached to its own region node");
                }
            }
        }
    }
    if (roots != 1) throw StateError("tree must have exactly one root");
    for (std::size_t idx = 0; idx < k; ++idx) {
        if (nodes_[region_node_[idx]].kind != NodeKind::Region || nodes_[region_node_[idx]].region != idx) {
            throw StateError("region map inconsistent for region " + std::to_string(idx));
        }
        if (nodes_[instance_node_[idx]].kind != NodeKind::Instance || nodes_[instance_node_[idx]].region != idx) {
            throw StateError("instance map inconsistent for region " + std::to_string(idx));
        }
    }
    if (bottom_up_order().size() != nodes_.size()) throw StateError("tree has unreachable nodes");
}

std::string tree_to_dot(const HierarchyTree& tree, std::span<const Region> regions) {
    std::vector<const Region*> by_index(tree.region_count(), nullptr);
    for (const auto& r : regions) {
        if (r.index < by_index.size()) by_index[r.index] = &r;
    }
    std::ostringstream os;
    os << "digraph hierarchy {\n";
    os << "  node [fontname=\"Helvetica\"];\n";
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        const auto& n = tree.node(id);
        os << "  n" << id << " [label=\"";
        if (n.kind == NodeKind::Root) {
            os << "image\", shape=doublecircle";
        } else {
            os << kind_name(n.kind) << ' ' << n.region;
            if (n.region < by_index.size() && by_index[n.region]) {
                const Box& b = by_index[n.region]->box;
                os << "\\n(" << fmt_num(b.x1()) << ',' << fmt_num(b.y1()) << ',' << fmt_num(b.x2()) << ','
                   << fmt_num(b.y2()) << ')';
            }
            os << '"' << (n.kind == NodeKind::Instance ? ", shape=box" : ", shape=ellipse");
        }
        os << "];\n";
    }
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        for (auto c : tree.node(id).children) os << "  n" << id << " -> n" << c << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string tree_to_json(const HierarchyTree& tree) {
    nlohmann::ordered_json doc;
    doc["format"] = "hipcap-tree";
    doc["version"] = 1;
    auto nodes = nlohmann::ordered_json::array();
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        const auto& n = tree.node(id);
        nlohmann::ordered_json j;
        j["id"] = id;
        j["kind"] = kind_name(n.kind);
        if (n.kind != NodeKind::Root) j["region"] = n.region;
        j["parent"] = n.parent ? nlohmann::ordered_json(*n.parent) : nlohmann::ordered_json(nullptr);
        j["children"] = n.children;
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

}  // namespace hipcap
