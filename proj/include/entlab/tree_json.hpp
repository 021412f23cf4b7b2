#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entlab/tree.hpp"

namespace entlab {

/// The on-disk tree format: {"parent": [...], "u": [...], "w": [...]} with u
/// and w optional. Unrecognised top-level keys (e.g. a "profile" block) are
/// carried through unchanged.
struct TreeDocument {
    std::vector<Vertex> parent;
    std::optional<std::vector<double>> u;
    std::optional<std::vector<double>> w;
    nlohmann::json extra = nlohmann::json::object();

    Tree tree(std::size_t max_vertices = kDefaultMaxVertices) const {
        return Tree::from_parents(parent, max_vertices);
    }
};

TreeDocument tree_document_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeDocument& doc);

TreeDocument read_tree_document(const std::string& path);
void write_tree_document(const std::string& path, const TreeDocument& doc);

/// [{"root": r, "vertices": [...]}, ...]
nlohmann::json partition_to_json(const SubtreePartition& partition);
SubtreePartition partition_from_json(const nlohmann::json& j);

}  // namespace entlab
