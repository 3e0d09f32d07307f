#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "edgecsp/blossom_solver.hpp"
#include "edgecsp/coverable.hpp"
#include "edgecsp/dmatroid.hpp"
#include "edgecsp/instance.hpp"
#include "edgecsp/matching.hpp"

namespace py = pybind11;
using namespace edgecsp;

namespace {

BitTuple parse_tuple(const Relation& r, const std::string& s) {
    if (static_cast<int>(s.size()) != r.arity())
        throw ParseError("tuple '" + s + "' does not match arity "
                         + std::to_string(r.arity()));
    BitTuple t = 0;
    for (int pos = 0; pos < r.arity(); ++pos) {
        const char c = s[static_cast<std::size_t>(pos)];
        if (c == '1')
            t |= bitmask(pos);
        else if (c != '0')
            throw ParseError("tuple '" + s + "' contains '" + std::string(1, c) + "'");
    }
    return t;
}

py::dict labeling_dict(const Instance& inst, const EdgeLabeling& f) {
    py::dict out;
    for (int v = 0; v < inst.var_count(); ++v)
        for (const auto& inc : inst.incidences(v)) {
            const std::string key =
                inst.variable(v) + "@" + inst.constraint_id(inc.constraint);
            out[py::str(key)] = static_cast<int>(bit(f.tuple(inc.constraint), inc.position));
        }
    return out;
}

py::dict result_dict(const Instance& inst, const SolveResult& result) {
    py::dict stats;
    stats["improvements"] = result.stats.improvements;
    stats["augmentations"] = result.stats.augmentations;
    stats["blossoms"] = result.stats.blossoms;
    stats["contractions"] = result.stats.contractions;
    stats["max_contraction_depth"] = result.stats.max_contraction_depth;
    py::dict out;
    out["count"] = result.inconsistencies;
    out["labeling"] = labeling_dict(inst, result.labeling);
    out["stats"] = std::move(stats);
    return out;
}

Instance make_instance(const std::vector<std::string>& variables,
                       const std::vector<std::pair<std::string, Relation>>& constraints) {
    InstanceData data;
    data.variables = variables;
    for (const auto& [id, relation] : constraints)
        data.constraints.push_back({id, relation});
    return Instance::create(std::move(data));
}

}  // namespace

PYBIND11_MODULE(_edgecsp, m) {
    m.doc() = "solver for Boolean edge CSPs whose constraints are delta-matroids "
              "given as tuple lists";

    const auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<RefusalError>(m, "RefusalError", base.ptr());
    py::register_exception<InternalError>(m, "InternalError", base.ptr());

    py::class_<Relation>(m, "Relation",
                         "tuple list over a named scope; bit i of a tuple string is "
                         "the value of scope[i]")
        .def(py::init([](std::vector<std::string> scope,
                         const std::vector<std::string>& tuples) {
                 return Relation::from_bit_strings(std::move(scope), tuples);
             }),
             py::arg("scope"), py::arg("tuples"))
        .def_property_readonly("scope", &Relation::scope)
        .def_property_readonly("tuples", &Relation::tuple_strings)
        .def_property_readonly("arity", &Relation::arity)
        .def("__len__", &Relation::size)
        .def("__contains__",
             [](const Relation& r, const std::string& t) {
                 return r.contains(parse_tuple(r, t));
             })
        .def(
            "__eq__",
            [](const Relation& a, const Relation& b) { return a == b; },
            py::is_operator())
        .def("__repr__", [](const Relation& r) {
            std::string out = "Relation([";
            for (std::size_t i = 0; i < r.scope().size(); ++i)
                out += (i ? ", '" : "'") + r.scope()[i] + "'";
            out += "], " + std::to_string(r.size()) + " tuples)";
            return out;
        });

    py::class_<Instance>(m, "Instance",
                         "edge CSP: every variable occurs in exactly two of the "
                         "constraint scopes")
        .def(py::init(&make_instance), py::arg("variables"), py::arg("constraints"))
        .def_property_readonly("variables", &Instance::variables)
        .def_property_readonly("constraint_ids",
                               [](const Instance& inst) {
                                   std::vector<std::string> ids;
                                   for (int c = 0; c < inst.constraint_count(); ++c)
                                       ids.push_back(inst.constraint_id(c));
                                   return ids;
                               })
        .def("relation", [](const Instance& inst, const std::string& id) {
            const int c = inst.constraint_index(id);
            if (c < 0) throw PreconditionError("unknown constraint '" + id + "'");
            return inst.relation(c);
        });

    m.def("is_delta_matroid", &is_delta_matroid, py::arg("relation"));
    m.def("is_even", &is_even, py::arg("relation"));
    m.def("is_coindependent", &is_coindependent, py::arg("relation"));
    m.def("is_self_complementary", &is_self_complementary, py::arg("relation"));
    m.def("contains_interference_minor", &contains_interference_minor,
          py::arg("relation"));

    m.def("direct_product", &direct_product, py::arg("a"), py::arg("b"));
    m.def("identify", &identify, py::arg("relation"), py::arg("w1"), py::arg("w2"));
    m.def("minor_fix", &minor_fix, py::arg("relation"), py::arg("var"), py::arg("value"));
    m.def("flip_values", &flip_values, py::arg("relation"), py::arg("positions"));
    m.def("rename_scope", &rename_scope, py::arg("relation"), py::arg("names"));
    m.def("d_transform", &d_transform, py::arg("relation"));

    m.def("interference_relation", &interference_relation);
    m.def("even_relation", &even_relation, py::arg("arity"));
    m.def("matching_relation", &matching_relation, py::arg("arity"));
    m.def("counterexample_arity6", &counterexample_arity6);

    m.def(
        "solve",
        [](const Instance& inst) { return result_dict(inst, optimize(inst)); },
        py::arg("instance"),
        "optimal labeling for even delta-matroid constraints");
    m.def(
        "solve_coverable",
        [](const Instance& inst, int workers) {
            CoverableOptions opts;
            opts.workers = workers;
            return result_dict(inst, solve_coverable(inst, detect_oracles(inst), opts));
        },
        py::arg("instance"), py::arg("workers") = 1,
        "optimal labeling via auto-detected covering oracles");
    m.def(
        "brute_force",
        [](const Instance& inst, long long bound, int workers) {
            const BruteForceResult result = brute_force_optimum(inst, bound, workers);
            py::dict out;
            out["count"] = result.optimum;
            out["labeling"] = labeling_dict(inst, result.witness);
            return out;
        },
        py::arg("instance"), py::arg("bound") = 10'000'000LL, py::arg("workers") = 1,
        "exhaustive reference optimum");

    m.def(
        "realize",
        [](const std::vector<std::string>& nodes,
           const std::vector<std::pair<std::string, std::string>>& edges,
           const std::vector<std::string>& pins, int workers) {
            return realize(SimpleGraph::create(nodes, edges), pins, workers);
        },
        py::arg("nodes"), py::arg("edges"), py::arg("pins"), py::arg("workers") = 1,
        "pin profile of a graph: tuples whose 1-pins can be deleted leaving a "
        "perfectly matchable graph");

    m.def(
        "detect_oracle_kind",
        [](const Relation& r) { return detect_cover_oracle(r).kind; },
        py::arg("relation"));
    m.def(
        "verify_cover",
        [](const Relation& r, const std::string& alpha, const Relation& cover) {
            const CoverCheck check = verify_cover(r, parse_tuple(r, alpha), cover);
            return py::make_tuple(check.ok, check.problems);
        },
        py::arg("relation"), py::arg("alpha"), py::arg("cover"));
    m.def(
        "even_zebra_cover_search",
        [](const Relation& r, const std::string& alpha, int max_arity) {
            return even_zebra_cover_search(r, parse_tuple(r, alpha), max_arity);
        },
        py::arg("relation"), py::arg("alpha"), py::arg("max_arity") = 8);

    m.def(
        "planar_tractability_report",
        [](const std::vector<Relation>& gamma) {
            const PlanarReport report = planar_tractability_report(gamma);
            py::list relations;
            for (const PlanarRelationReport& r : report.relations) {
                py::dict entry;
                entry["self_complementary"] = r.self_complementary;
                entry["d_transform_applicable"] = r.d_transform_applicable;
                entry["d_transform_even_delta_matroid"] = r.d_transform_even_delta_matroid;
                entry["satisfies_condition"] = r.satisfies_condition;
                relations.append(std::move(entry));
            }
            py::dict out;
            out["relations"] = std::move(relations);
            out["condition_holds"] = report.condition_holds;
            out["even_constants"] = report.even_constants;
            return out;
        },
        py::arg("gamma"));
}
