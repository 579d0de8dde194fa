#include "lexlearn/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lexlearn/errors.hpp"

namespace lexlearn {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<std::string_view> keys,
                  std::string_view where) {
    if (!obj.is_object()) {
        throw ParseError(std::string(where) + ": expected an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
            throw ParseError(std::string(where) + ": unknown key '" + it.key() + "'");
        }
    }
    for (auto key : keys) {
        if (!obj.contains(key)) {
            throw ParseError(std::string(where) + ": missing key '" + std::string(key) + "'");
        }
    }
}

std::string string_field(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        throw ParseError(std::string(where) + ": '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

Ontology Ontology::from_json(const json& doc) {
    require_keys(doc, {"concepts", "entities"}, "ontology");
    if (!doc["concepts"].is_array() || !doc["entities"].is_array()) {
        throw ParseError("ontology: 'concepts' and 'entities' must be arrays");
    }

    Ontology o;
    for (const auto& c : doc["concepts"]) {
        require_keys(c, {"id", "label", "parent"}, "concept");
        ConceptNode node{string_field(c, "id", "concept"), string_field(c, "label", "concept"),
                         std::nullopt};
        const auto& parent = c["parent"];
        if (parent.is_string()) {
            node.parent = parent.get<std::string>();
        } else if (!parent.is_null()) {
            throw ParseError("concept '" + node.id + "': 'parent' must be a string or null");
        }
        o.concepts_.push_back(std::move(node));
    }
    for (const auto& e : doc["entities"]) {
        require_keys(e, {"id", "label", "concept"}, "entity");
        o.entities_.push_back(Entity{string_field(e, "id", "entity"),
                                     string_field(e, "label", "entity"),
                                     string_field(e, "concept", "entity")});
    }

    std::set<std::string, std::less<>> concept_ids;
    std::set<std::string, std::less<>> seen;
    auto claim = [&](const std::string& id) {
        if (id.empty()) {
            throw ValidationError(ValidationIssue::empty_id, id, "node id must not be empty");
        }
        if (!seen.insert(id).second) {
            throw ValidationError(ValidationIssue::duplicate_id, id, "duplicate id '" + id + "'");
        }
    };
    for (const auto& c : o.concepts_) {
        claim(c.id);
        concept_ids.insert(c.id);
    }
    for (const auto& e : o.entities_) {
        claim(e.id);
    }

    std::map<std::string, std::optional<std::string>, std::less<>> parent_of;
    for (const auto& c : o.concepts_) {
        if (c.parent && !concept_ids.contains(*c.parent)) {
            throw ValidationError(ValidationIssue::dangling_reference, c.id,
                                  "concept '" + c.id + "' has unknown parent '" + *c.parent + "'");
        }
        parent_of.emplace(c.id, c.parent);
    }
    for (const auto& e : o.entities_) {
        if (!concept_ids.contains(e.concept_id)) {
            throw ValidationError(ValidationIssue::dangling_reference, e.id,
                                  "entity '" + e.id + "' references unknown concept '" +
                                      e.concept_id + "'");
        }
    }

    // Walk up from every concept; revisiting a node on the same walk is a cycle.
    for (const auto& c : o.concepts_) {
        std::vector<std::string> path;
        std::optional<std::string> cur = c.id;
        while (cur) {
            auto hit = std::find(path.begin(), path.end(), *cur);
            if (hit != path.end()) {
                std::string smallest = *std::min_element(hit, path.end());
                throw ValidationError(ValidationIssue::cycle, smallest,
                                      "parent links form a cycle through '" + smallest + "'");
            }
            path.push_back(*cur);
            cur = parent_of.find(*cur)->second;
        }
    }

    std::vector<std::string> roots;
    for (const auto& c : o.concepts_) {
        if (!c.parent) {
            roots.push_back(c.id);
        }
    }
    if (roots.size() != 1) {
        std::string id = roots.empty() ? std::string() : roots[1];
        throw ValidationError(ValidationIssue::root_count, id,
                              "exactly one root concept required, found " +
                                  std::to_string(roots.size()));
    }
    if (o.entities_.empty()) {
        throw ValidationError(ValidationIssue::no_entities, roots.front(),
                              "ontology must contain at least one entity");
    }

    o.index();
    return o;
}

Ontology Ontology::parse(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return from_json(doc);
}

Ontology Ontology::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot read ontology file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Ontology::index() {
    nodes_.clear();
    by_id_.clear();
    for (const auto& c : concepts_) {
        by_id_.emplace(c.id, nodes_.size());
        nodes_.push_back(Node{c.id, c.label, NodeKind::concept_node, npos, {}, {}});
    }
    for (const auto& e : entities_) {
        by_id_.emplace(e.id, nodes_.size());
        nodes_.push_back(Node{e.id, e.label, NodeKind::entity, npos, {}, {}});
    }
    for (const auto& c : concepts_) {
        auto self = by_id_.find(c.id)->second;
        if (c.parent) {
            auto p = by_id_.find(*c.parent)->second;
            nodes_[self].parent = p;
            nodes_[p].child_concepts.push_back(self);
        } else {
            root_ = self;
        }
    }
    for (const auto& e : entities_) {
        auto self = by_id_.find(e.id)->second;
        auto p = by_id_.find(e.concept_id)->second;
        nodes_[self].parent = p;
        nodes_[p].entities.push_back(self);
    }

    auto by_node_id = [this](std::size_t a, std::size_t b) { return nodes_[a].id < nodes_[b].id; };
    for (auto& n : nodes_) {
        std::sort(n.child_concepts.begin(), n.child_concepts.end(), by_node_id);
        std::sort(n.entities.begin(), n.entities.end(), by_node_id);
    }

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& n = nodes_[i];
        if (n.kind == NodeKind::entity) {
            n.extension_size = 1;
            n.sibling_weight = nodes_[n.parent].entities.size();
            // Every entity adds one to the extension of each ancestor concept.
            for (auto a = n.parent; a != npos; a = nodes_[a].parent) {
                ++nodes_[a].extension_size;
            }
        } else if (n.parent != npos) {
            n.sibling_weight = nodes_[n.parent].child_concepts.size();
        }
        for (auto a = n.parent; a != npos; a = nodes_[a].parent) {
            ++n.depth;
        }
    }
}

std::size_t Ontology::at(std::string_view id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw UnknownNode(std::string(id));
    }
    return it->second;
}

bool Ontology::contains(std::string_view id) const noexcept { return by_id_.contains(id); }

bool Ontology::is_entity(std::string_view id) const noexcept {
    auto it = by_id_.find(id);
    return it != by_id_.end() && nodes_[it->second].kind == NodeKind::entity;
}

bool Ontology::is_concept(std::string_view id) const noexcept {
    auto it = by_id_.find(id);
    return it != by_id_.end() && nodes_[it->second].kind == NodeKind::concept_node;
}

NodeKind Ontology::kind(std::string_view id) const { return nodes_[at(id)].kind; }

const std::string& Ontology::label(std::string_view id) const { return nodes_[at(id)].label; }

std::size_t Ontology::extension_size(std::string_view node) const {
    return nodes_[at(node)].extension_size;
}

std::size_t Ontology::sibling_weight(std::string_view node) const {
    return nodes_[at(node)].sibling_weight;
}

bool Ontology::covers(std::string_view node, std::string_view entity) const {
    auto target = at(node);
    auto e = at(entity);
    if (nodes_[e].kind != NodeKind::entity) {
        throw UnknownEntity(std::string(entity));
    }
    if (target == e) {
        return true;
    }
    for (auto a = nodes_[e].parent; a != npos; a = nodes_[a].parent) {
        if (a == target) {
            return true;
        }
    }
    return false;
}

std::vector<std::string> Ontology::extension(std::string_view node) const {
    auto start = at(node);
    std::vector<std::string> out;
    if (nodes_[start].kind == NodeKind::entity) {
        out.push_back(nodes_[start].id);
        return out;
    }
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (auto e : nodes_[cur].entities) {
            out.push_back(nodes_[e].id);
        }
        stack.insert(stack.end(), nodes_[cur].child_concepts.begin(),
                     nodes_[cur].child_concepts.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Ontology::child_concepts(std::string_view concept_id) const {
    std::vector<std::string> out;
    for (auto c : nodes_[at(concept_id)].child_concepts) {
        out.push_back(nodes_[c].id);
    }
    return out;
}

std::vector<std::string> Ontology::direct_entities(std::string_view concept_id) const {
    std::vector<std::string> out;
    for (auto e : nodes_[at(concept_id)].entities) {
        out.push_back(nodes_[e].id);
    }
    return out;
}

std::optional<std::string> Ontology::parent(std::string_view node) const {
    auto p = nodes_[at(node)].parent;
    if (p == npos) {
        return std::nullopt;
    }
    return nodes_[p].id;
}

std::size_t Ontology::depth(std::string_view node) const { return nodes_[at(node)].depth; }

std::vector<std::string> Ontology::node_ids() const {
    std::vector<std::string> out;
    out.reserve(by_id_.size());
    for (const auto& [id, _] : by_id_) {
        out.push_back(id);
    }
    return out;
}

nlohmann::json Ontology::to_json() const {
    json concepts = json::array();
    for (const auto& c : concepts_) {
        concepts.push_back({{"id", c.id},
                            {"label", c.label},
                            {"parent", c.parent ? json(*c.parent) : json(nullptr)}});
    }
    json entities = json::array();
    for (const auto& e : entities_) {
        entities.push_back({{"id", e.id}, {"label", e.label}, {"concept", e.concept_id}});
    }
    return {{"concepts", std::move(concepts)}, {"entities", std::move(entities)}};
}

}  // namespace lexlearn
