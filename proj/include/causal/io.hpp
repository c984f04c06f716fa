#pragma once

#include <iosfwd>
#include <string>

#include "causal/graph.hpp"
#include "causal/igsp.hpp"
#include "causal/interventions.hpp"
#include "causal/sem.hpp"

namespace causal {

// All file formats carry 1-based node labels; the in-memory API is 0-based.

// Graph JSON: {"p": <int>, "edges": [[i, j], ...]}
Dag graph_from_json(const std::string& text);
std::string graph_to_json(const Dag& g);

// Target family JSON: {"p": <int>, "targets": [[], [2], [2,3], ...]}
TargetFamily family_from_json(const std::string& text);
std::string family_to_json(const TargetFamily& fam);

// Model JSON: graph fields plus "weights": [[i, j, w], ...], "noise_var": [...]
SemModel model_from_json(const std::string& text);
std::string model_to_json(const SemModel& m);

// Dataset CSV: header "block,target,X1,...,Xp"; block is the 0-based index
// into the family, target is "obs" or semicolon-joined 1-based labels.
void write_dataset_csv(std::ostream& out, const MultiDataset& data);
MultiDataset read_dataset_csv(std::istream& in);

struct LearnReport {
    SearchResult result;
    long ci_queries = 0;
    long ci_evaluated = 0;
    long inv_queries = 0;
    long inv_evaluated = 0;
};

std::string learn_report_to_json(const LearnReport& report);

std::string format_double(double v);  // shortest-exact decimal, %.17g

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace causal
