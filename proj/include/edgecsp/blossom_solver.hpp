#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgecsp/instance.hpp"
#include "edgecsp/walks.hpp"

namespace edgecsp {

using TraceEvent = nlohmann::json;

// Closed alternating walk b_0 C_1 b_1 ... C_k b_k with b_0 = b_k found when
// two branches of the search forest meet. Indices refer to the instance the
// blossom was found in. stamps holds the forest timestamps of C_1..C_k; ell
// is the 1-based position of the maximal timestamp, so stamps strictly
// increase up to ell and strictly decrease afterwards.
struct BlossomData {
    std::vector<int> b_vars;         // b_0..b_k, front() == back()
    std::vector<int> b_constraints;  // C_1..C_k
    std::vector<int> stamps;         // t_1..t_k
    int ell = 1;
    std::optional<Walk> stem;  // root-to-r walk flipped into f (lca-in-constraint case)

    int k() const { return static_cast<int>(b_constraints.size()); }

    // The two directed paths b_0 C_1 ... b_{ell-1} C_ell and
    // b_k C_k ... b_ell C_ell meeting in C_ell.
    FDag dag() const;
};

// Everything needed to undo one contraction: the instance and labeling the
// blossom lives in (after any stem flip), the contracted instance and its
// labeling, and the variable bookkeeping.
struct ContractionRecord {
    Instance original;
    EdgeLabeling f_before;
    Instance contracted;
    EdgeLabeling f_after;
    BlossomData blossom;
    std::string new_constraint;            // id of the one-hot constraint N
    std::vector<std::string> l_ids;        // distinct blossom constraints, first C_1
    std::vector<std::string> new_vars;     // v_C names, parallel to l_ids
};

struct SolveHooks {
    // after every mutation of the search forest
    std::function<void(const Instance&, const EdgeLabeling&, const FDag&)> on_forest;
    // forest plus the just-discovered edge w -> C^t, before augmenting or contracting
    std::function<void(const Instance&, const EdgeLabeling&, const FDag&)> on_forest_star;
    // blossom as extracted, with the labeling it is a blossom for
    std::function<void(const Instance&, const EdgeLabeling&, const BlossomData&)> on_blossom;
    std::function<void(const ContractionRecord&, int depth)> on_contract;
};

struct SolveOptions {
    // run validate_fdag after every forest mutation and on the extended
    // forest before augment/contract; violations raise InternalError
    bool validate_forest = false;
    SolveHooks hooks;
    std::vector<TraceEvent>* trace = nullptr;
};

struct SolveStats {
    int improvements = 0;
    int augmentations = 0;
    int blossoms = 0;
    int contractions = 0;
    int max_contraction_depth = 0;
};

struct SolveResult {
    EdgeLabeling labeling;
    int inconsistencies = 0;
    SolveStats stats;
};

// One round of the search: grow a forest from the inconsistent variables and
// either return a labeling with exactly two fewer inconsistencies or
// certify that none exists. Contractions are handled internally through an
// explicit record stack. Requires even delta-matroid constraints.
std::optional<EdgeLabeling> improve(const Instance& inst, const EdgeLabeling& f,
                                    const SolveOptions& opts = {}, SolveStats* stats = nullptr);

// Repeated improvement until optimal. Refuses instances with constraints
// that are not even delta-matroids and points the caller at the coverable
// solver instead.
SolveResult optimize(const Instance& inst, const EdgeLabeling& start, const SolveOptions& opts = {});
SolveResult optimize(const Instance& inst, const SolveOptions& opts = {});

// Contract a blossom of f: replace the blossom variables by one fresh
// variable v_C per distinct blossom constraint, rebuild those constraints,
// and add a one-hot constraint N tying the v_C together. Inconsistency
// count is preserved and every rebuilt relation is again an even
// delta-matroid (asserted).
ContractionRecord contract(const Instance& inst, const EdgeLabeling& f, const BlossomData& blossom);

// Push an improvement of the contracted instance back through one
// contraction. g_b must be valid for record.contracted with fewer
// inconsistencies than record.f_after; the result is valid for
// record.original with exactly two fewer inconsistencies than
// record.f_before.
EdgeLabeling lift_improvement(const ContractionRecord& record, const EdgeLabeling& g_b,
                              const SolveOptions& opts = {});

// Extract an augmenting f-walk from a strictly better labeling g. The walk
// never starts at avoid_var (pass -1 to allow any start). Two stages: first
// g is homogenized so that every f-consistent variable is also g-consistent,
// then the walk is grown greedily inside the symmetric difference.
Walk find_augmenting_walk(const Instance& inst, const EdgeLabeling& f, const EdgeLabeling& g,
                          int avoid_var = -1);

}  // namespace edgecsp
