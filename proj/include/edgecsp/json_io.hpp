#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edgecsp/coverable.hpp"
#include "edgecsp/dmatroid.hpp"
#include "edgecsp/instance.hpp"
#include "edgecsp/matching.hpp"

namespace edgecsp {

using Json = nlohmann::json;

// Bumped when any of the file layouts below changes shape.
inline constexpr int kSchemaVersion = 1;

// Reads and parses a whole file; ParseError on anything that goes wrong.
Json load_json_file(const std::string& path);

// {"scope": ["x","y"], "tuples": ["01","10"]}, bit i = value of scope[i]
Json relation_to_json(const Relation& r);
Relation relation_from_json(const Json& j);

// {"variables": [...], "constraints": [{"id","scope","tuples"}...]};
// constraint entries may carry an "oracle" object, read separately below
Json instance_to_json(const InstanceData& data);
InstanceData instance_from_json(const Json& j);

// Flat map "variable@constraint" -> 0/1, one entry per half-edge.
Json labeling_to_json(const Instance& inst, const EdgeLabeling& f);
EdgeLabeling labeling_from_json(const Instance& inst, const Json& j);

// {"nodes": [...], "edges": [["a","b"],...], "pins": [...]}
struct PinnedGraph {
    SimpleGraph graph;
    std::vector<std::string> pins;
};
Json pinned_graph_to_json(const PinnedGraph& pg);
PinnedGraph pinned_graph_from_json(const Json& j);

// {"class": "coindependent"|"compact"|"interference_free",
//  "params": {"gc": "ones", "S": [...]}}  (params for compact only)
CoverOracle oracle_from_json(const Json& j);

// Collects the per-constraint "oracle" entries of an instance file; absent
// entries are simply missing from the map.
OracleMap oracles_from_json(const Json& instance_json);

Json cover_check_to_json(const CoverCheck& check);
Json planar_report_to_json(const PlanarReport& report);

}  // namespace edgecsp
