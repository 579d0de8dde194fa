#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexlearn {

struct ConceptNode {
    std::string id;
    std::string label;
    std::optional<std::string> parent;  // absent for the root

    bool operator==(const ConceptNode&) const = default;
};

struct Entity {
    std::string id;
    std::string label;
    std::string concept_id;

    bool operator==(const Entity&) const = default;
};

enum class NodeKind { concept_node, entity };

/// Single-rooted concept tree with entities hanging off concepts.
///
/// Built only through the loaders, which validate the document; an Ontology
/// value is immutable afterwards and safe to share between threads.
class Ontology {
public:
    /// Throws ParseError for a document with the wrong shape (missing or
    /// unknown keys, wrong types) and ValidationError for structural problems.
    static Ontology from_json(const nlohmann::json& doc);
    static Ontology parse(std::string_view text);
    static Ontology load_file(const std::filesystem::path& path);

    const std::vector<ConceptNode>& concepts() const noexcept { return concepts_; }
    const std::vector<Entity>& entities() const noexcept { return entities_; }
    const std::string& root() const noexcept { return nodes_[root_].id; }

    bool contains(std::string_view id) const noexcept;
    bool is_entity(std::string_view id) const noexcept;
    bool is_concept(std::string_view id) const noexcept;
    NodeKind kind(std::string_view id) const;
    const std::string& label(std::string_view id) const;

    /// Number of entities under `node`: 1 for an entity, the transitive count
    /// for a concept (possibly 0).
    std::size_t extension_size(std::string_view node) const;

    /// 1 + number of siblings. Concept siblings share a parent concept, entity
    /// siblings share a concept, and the root has none.
    std::size_t sibling_weight(std::string_view node) const;

    /// True iff `entity` lies in the extension of `node`.
    bool covers(std::string_view node, std::string_view entity) const;

    /// Entity ids in the extension of `node`, sorted.
    std::vector<std::string> extension(std::string_view node) const;

    /// Direct child concepts, sorted by id.
    std::vector<std::string> child_concepts(std::string_view concept_id) const;
    /// Entities attached directly to a concept, sorted by id.
    std::vector<std::string> direct_entities(std::string_view concept_id) const;

    /// Parent concept of a concept, or the owning concept of an entity.
    std::optional<std::string> parent(std::string_view node) const;

    /// Number of edges between `node` and the root.
    std::size_t depth(std::string_view node) const;

    /// All node ids (concepts and entities) sorted lexicographically.
    std::vector<std::string> node_ids() const;

    /// The source document, in the order it was loaded.
    nlohmann::json to_json() const;

    std::size_t node_count() const noexcept { return nodes_.size(); }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    struct Node {
        std::string id;
        std::string label;
        NodeKind kind;
        std::size_t parent = npos;
        std::vector<std::size_t> child_concepts;
        std::vector<std::size_t> entities;
        std::size_t extension_size = 0;
        std::size_t sibling_weight = 1;
        std::size_t depth = 0;
    };

    Ontology() = default;
    void index();
    std::size_t at(std::string_view id) const;

    std::vector<ConceptNode> concepts_;
    std::vector<Entity> entities_;
    std::vector<Node> nodes_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    std::size_t root_ = 0;
};

}  // namespace lexlearn
