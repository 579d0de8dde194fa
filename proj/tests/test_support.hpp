#pragma once

// Shared helpers for the test binaries: fixture locations, a seeded random
// tree generator and an enumeration oracle that recomputes posteriors
// straight from the ontology document, without going through the library's
// indexes or its rational arithmetic.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexlearn/ontology.hpp"

namespace lexlearn::testing {

inline std::filesystem::path data_dir() { return LEXLEARN_DATA_DIR; }
inline std::filesystem::path hr1099_path() { return data_dir() / "hr-1099.json"; }

inline std::shared_ptr<const Ontology> hr1099() {
    static auto o = std::make_shared<const Ontology>(Ontology::load_file(hr1099_path()));
    return o;
}

/// Random single-rooted tree document with at most `max_nodes` nodes.
inline nlohmann::json random_tree_document(std::mt19937_64& rng, std::size_t max_nodes = 50) {
    std::uniform_int_distribution<std::size_t> concept_count(1, max_nodes / 3);
    std::size_t nc = concept_count(rng);
    std::uniform_int_distribution<std::size_t> entity_count(1, max_nodes - nc);
    std::size_t ne = entity_count(rng);

    auto concepts = nlohmann::json::array();
    for (std::size_t i = 0; i < nc; ++i) {
        nlohmann::json parent = nullptr;
        if (i > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            parent = "c" + std::to_string(pick(rng));
        }
        concepts.push_back(
            {{"id", "c" + std::to_string(i)}, {"label", "C" + std::to_string(i)}, {"parent", parent}});
    }
    auto entities = nlohmann::json::array();
    std::uniform_int_distribution<std::size_t> owner(0, nc - 1);
    for (std::size_t i = 0; i < ne; ++i) {
        entities.push_back({{"id", "e" + std::to_string(i)},
                            {"label", "E" + std::to_string(i)},
                            {"concept", "c" + std::to_string(owner(rng))}});
    }
    return {{"concepts", concepts}, {"entities", entities}};
}

/// Posterior by exhaustive enumeration over every node of the document.
/// Returns node -> mass; nodes with empty extension are absent.
inline std::map<std::string, long double> oracle_posterior(const nlohmann::json& doc,
                                                           const std::vector<std::string>& obs) {
    std::map<std::string, std::string> parent;  // concept -> parent ("" for root)
    std::map<std::string, std::string> owner;   // entity -> concept
    for (const auto& c : doc["concepts"]) {
        parent[c["id"]] = c["parent"].is_null() ? "" : c["parent"].get<std::string>();
    }
    for (const auto& e : doc["entities"]) {
        owner[e["id"]] = e["concept"];
    }
    auto under = [&](const std::string& entity, const std::string& node) {
        if (entity == node) return true;
        for (std::string c = owner[entity]; !c.empty(); c = parent[c]) {
            if (c == node) return true;
        }
        return false;
    };

    std::map<std::string, long double> weight;
    for (const auto& [node, p] : parent) {
        long double ext = 0;
        for (const auto& [e, _] : owner) ext += under(e, node) ? 1 : 0;
        if (ext == 0) continue;
        long double siblings = 0;
        if (!p.empty()) {
            for (const auto& [other, op] : parent) siblings += (other != node && op == p) ? 1 : 0;
        }
        long double w = siblings + 1;
        for (const auto& x : obs) w *= under(x, node) ? 1 / ext : 0;
        weight[node] = w;
    }
    for (const auto& [node, c] : owner) {
        long double siblings = 0;
        for (const auto& [other, oc] : owner) siblings += (other != node && oc == c) ? 1 : 0;
        long double w = siblings + 1;
        for (const auto& x : obs) w *= x == node ? 1 : 0;
        weight[node] = w;
    }
    long double z = 0;
    for (const auto& [_, w] : weight) z += w;
    for (auto& [_, w] : weight) w /= z;
    return weight;
}

/// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("lexlearn-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace lexlearn::testing
