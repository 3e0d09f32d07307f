#include "edgecsp/json_io.hpp"

#include <fstream>
#include <set>
#include <utility>

namespace edgecsp {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::vector<std::string> string_list(const Json& j, const char* key) {
    const Json& arr = field(j, key);
    if (!arr.is_array()) fail(std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const Json& item : arr) {
        if (!item.is_string())
            fail(std::string("field '") + key + "' must hold strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void check_schema(const Json& j) {
    if (j.is_object() && j.contains("schema") && j.at("schema") != kSchemaVersion)
        fail("unsupported schema version " + j.at("schema").dump());
}

}  // namespace

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(path + ": " + e.what());
    }
}

Json relation_to_json(const Relation& r) {
    return Json{{"scope", r.scope()}, {"tuples", r.tuple_strings()}};
}

Relation relation_from_json(const Json& j) {
    check_schema(j);
    return Relation::from_bit_strings(string_list(j, "scope"), string_list(j, "tuples"));
}

Json instance_to_json(const InstanceData& data) {
    Json constraints = Json::array();
    for (const ConstraintSpec& c : data.constraints) {
        Json entry = relation_to_json(c.relation);
        entry["id"] = c.id;
        constraints.push_back(std::move(entry));
    }
    return Json{{"schema", kSchemaVersion},
                {"variables", data.variables},
                {"constraints", std::move(constraints)}};
}

InstanceData instance_from_json(const Json& j) {
    check_schema(j);
    InstanceData data;
    data.variables = string_list(j, "variables");
    const Json& constraints = field(j, "constraints");
    if (!constraints.is_array()) fail("field 'constraints' must be an array");
    for (const Json& entry : constraints) {
        const Json& id = field(entry, "id");
        if (!id.is_string()) fail("constraint 'id' must be a string");
        data.constraints.push_back({id.get<std::string>(), relation_from_json(entry)});
    }
    return data;
}

Json labeling_to_json(const Instance& inst, const EdgeLabeling& f) {
    Json out = Json::object();
    for (int v = 0; v < inst.var_count(); ++v)
        for (const auto& inc : inst.incidences(v))
            out[inst.variable(v) + "@" + inst.constraint_id(inc.constraint)] =
                static_cast<int>(bit(f.tuple(inc.constraint), inc.position));
    return out;
}

EdgeLabeling labeling_from_json(const Instance& inst, const Json& j) {
    check_schema(j);
    if (!j.is_object()) fail("labeling must be an object");
    std::vector<BitTuple> tuples(static_cast<std::size_t>(inst.constraint_count()), 0);
    std::size_t seen = 0;
    for (int v = 0; v < inst.var_count(); ++v) {
        for (const auto& inc : inst.incidences(v)) {
            const std::string key =
                inst.variable(v) + "@" + inst.constraint_id(inc.constraint);
            if (!j.contains(key)) fail("labeling is missing '" + key + "'");
            const Json& value = j.at(key);
            if (!value.is_number_integer() || (value != 0 && value != 1))
                fail("labeling entry '" + key + "' must be 0 or 1");
            if (value == 1)
                tuples[static_cast<std::size_t>(inc.constraint)] |= bitmask(inc.position);
            ++seen;
        }
    }
    if (j.size() != seen + (j.contains("schema") ? 1 : 0))
        fail("labeling has entries for unknown half-edges");
    return EdgeLabeling(std::move(tuples));
}

Json pinned_graph_to_json(const PinnedGraph& pg) {
    Json edges = Json::array();
    for (const auto& [a, b] : pg.graph.edges)
        edges.push_back(Json::array({pg.graph.nodes[static_cast<std::size_t>(a)],
                                     pg.graph.nodes[static_cast<std::size_t>(b)]}));
    return Json{{"schema", kSchemaVersion},
                {"nodes", pg.graph.nodes},
                {"edges", std::move(edges)},
                {"pins", pg.pins}};
}

PinnedGraph pinned_graph_from_json(const Json& j) {
    check_schema(j);
    const std::vector<std::string> nodes = string_list(j, "nodes");
    const Json& edges = field(j, "edges");
    if (!edges.is_array()) fail("field 'edges' must be an array");
    std::vector<std::pair<std::string, std::string>> endpoint_names;
    for (const Json& e : edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            fail("each edge must be a pair of node names");
        endpoint_names.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    PinnedGraph pg{SimpleGraph::create(nodes, endpoint_names),
                   j.contains("pins") ? string_list(j, "pins") : std::vector<std::string>{}};
    return pg;
}

CoverOracle oracle_from_json(const Json& j) {
    const Json& kind = field(j, "class");
    if (!kind.is_string()) fail("oracle 'class' must be a string");
    const std::string name = kind.get<std::string>();
    if (name == "coindependent") return coindependent_oracle();
    if (name == "interference_free") return interference_free_oracle();
    if (name == "compact") {
        const Json& params = field(j, "params");
        const Json& gc = field(params, "gc");
        if (gc != "ones") fail("unknown gc-function " + gc.dump());
        const Json& s = field(params, "S");
        if (!s.is_array()) fail("compact oracle parameter 'S' must be an array");
        std::set<int> levels;
        for (const Json& level : s) {
            if (!level.is_number_integer()) fail("'S' must hold integers");
            levels.insert(level.get<int>());
        }
        return compact_oracle(gc_ones(), std::move(levels));
    }
    fail("unknown oracle class '" + name + "'");
}

OracleMap oracles_from_json(const Json& instance_json) {
    OracleMap oracles;
    if (!instance_json.is_object() || !instance_json.contains("constraints"))
        return oracles;
    for (const Json& entry : instance_json.at("constraints"))
        if (entry.is_object() && entry.contains("oracle"))
            oracles.emplace(field(entry, "id").get<std::string>(),
                            oracle_from_json(entry.at("oracle")));
    return oracles;
}

Json cover_check_to_json(const CoverCheck& check) {
    return Json{{"ok", check.ok}, {"problems", check.problems}};
}

Json planar_report_to_json(const PlanarReport& report) {
    Json relations = Json::array();
    for (const PlanarRelationReport& r : report.relations)
        relations.push_back(
            {{"self_complementary", r.self_complementary},
             {"d_transform_applicable", r.d_transform_applicable},
             {"d_transform_even_delta_matroid", r.d_transform_even_delta_matroid},
             {"satisfies_condition", r.satisfies_condition}});
    Json constants = Json::array();
    for (const Relation& r : report.even_constants) constants.push_back(relation_to_json(r));
    return Json{{"schema", kSchemaVersion},
                {"relations", std::move(relations)},
                {"condition_holds", report.condition_holds},
                {"even_constants", std::move(constants)}};
}

}  // namespace edgecsp
