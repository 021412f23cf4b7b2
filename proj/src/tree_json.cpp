#include "entlab/tree_json.hpp"

#include <fstream>

namespace entlab {

namespace {

std::vector<double> read_weights(const nlohmann::json& j, const char* key, std::size_t n) {
    if (!j.is_array()) throw InvalidArgument(std::string("tree json: '") + key + "' must be an array");
    auto v = j.get<std::vector<double>>();
    if (v.size() != n)
        throw InvalidArgument(std::string("tree json: '") + key + "' has " + std::to_string(v.size()) +
                              " entries, expected " + std::to_string(n));
    return v;
}

}  // namespace

TreeDocument tree_document_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("parent")) throw InvalidArgument("tree json: missing 'parent'");
    TreeDocument doc;
    try {
        doc.parent = j.at("parent").get<std::vector<Vertex>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("tree json: bad 'parent': ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "parent") continue;
        if (key == "u") {
            doc.u = read_weights(value, "u", doc.parent.size());
        } else if (key == "w") {
            doc.w = read_weights(value, "w", doc.parent.size());
        } else {
            doc.extra[key] = value;
        }
    }
    return doc;
}

nlohmann::json to_json(const TreeDocument& doc) {
    nlohmann::json j = doc.extra.is_object() ? doc.extra : nlohmann::json::object();
    j["parent"] = doc.parent;
    if (doc.u) j["u"] = *doc.u;
    if (doc.w) j["w"] = *doc.w;
    return j;
}

TreeDocument read_tree_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open tree file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("tree file " + path + ": " + e.what());
    }
    return tree_document_from_json(j);
}

void write_tree_document(const std::string& path, const TreeDocument& doc) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write tree file " + path);
    out << to_json(doc).dump() << '\n';
}

nlohmann::json partition_to_json(const SubtreePartition& partition) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : partition.parts) arr.push_back({{"root", p.root}, {"vertices", p.vertices}});
    return arr;
}

SubtreePartition partition_from_json(const nlohmann::json& j) {
    SubtreePartition out;
    for (const auto& e : j) {
        Part p;
        p.root = e.at("root").get<Vertex>();
        p.vertices = e.at("vertices").get<std::vector<Vertex>>();
        out.parts.push_back(std::move(p));
    }
    return out;
}

}  // namespace entlab
